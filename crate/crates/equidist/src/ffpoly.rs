//! Arithmetic in `F_p` and sparse multivariate polynomial systems.
//!
//! A [`PolynomialSystem`] holds `n` polynomials in `m` variables with
//! coefficients reduced modulo a prime `p`, in sparse monomial form.
//! Evaluation is exact (128-bit intermediates), and the full domain `F_p^m`
//! enumerates in lexicographic order, splittable into contiguous chunks for
//! deterministic data-parallel consumption.
//!
//! Systems can be read from a small text grammar
//! (`p=5; m=2; n=2; G1 = X1 + X2; G2 = 3*X1^2*X2`) or from JSON
//! (`{"p":5,"m":2,"n":2,"polys":[[{"c":1,"e":[1,0]},...],...]}`).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Deterministic Miller-Rabin primality test, correct for every `u64`.
///
/// The witness set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37} is known to
/// be sufficient below 3.3 * 10^24, which covers the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_raw(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A validated prime modulus. Construction runs the deterministic
/// primality check; a `PrimeModulus` therefore always holds a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(PrimeModulus(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for PrimeModulus {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        PrimeModulus::new(p)
    }
}

impl From<PrimeModulus> for u64 {
    fn from(p: PrimeModulus) -> u64 {
        p.0
    }
}

impl std::fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

// Plain square-and-multiply, no Fermat reduction; used by the primality test
// where the modulus is not yet known to be prime.
fn pow_mod_raw(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// `base^exp mod p` by square-and-multiply.
///
/// For a nonzero base the exponent is reduced modulo `p - 1` (Fermat), which
/// must not be done at base 0: `0^(p-2)` has to stay 0 so that `X^(p-2)`
/// realizes the modular inverse extended by 0 at 0.
#[inline]
pub fn pow_mod(base: u64, exp: u64, p: u64) -> u64 {
    debug_assert!(base < p);
    if base == 0 {
        return if exp == 0 { 1 % p } else { 0 };
    }
    let e = if p > 2 { exp % (p - 1) } else { 0 };
    pow_mod_raw(base, e, p)
}

/// One term `c * X1^e1 * ... * Xm^em`. The coefficient is stored reduced
/// into `[0, p)`; the exponent vector always has length `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    #[serde(rename = "c")]
    pub coefficient: u64,
    #[serde(rename = "e")]
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(coefficient: u64, exponents: Vec<u32>) -> Self {
        Monomial {
            coefficient,
            exponents,
        }
    }

    #[inline]
    fn eval(&self, x: &[u64], p: u64) -> u64 {
        let mut acc = self.coefficient;
        for (xi, &ei) in x.iter().zip(&self.exponents) {
            if ei != 0 {
                acc = mul_mod(acc, pow_mod(*xi, ei as u64, p), p);
            }
        }
        acc
    }
}

/// A system `G = (G_1, ..., G_n)` of `n` polynomials in `m` variables over
/// `F_p`, in canonical sparse form: monomials sorted by descending
/// lexicographic exponent order, like terms merged, zero terms dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct PolynomialSystem {
    #[serde(rename = "p")]
    modulus: PrimeModulus,
    m: usize,
    n: usize,
    polys: Vec<Vec<Monomial>>,
}

/// Unvalidated mirror of the JSON shape; `TryFrom` re-checks all invariants.
#[derive(Deserialize)]
struct RawSystem {
    p: u64,
    m: usize,
    n: usize,
    polys: Vec<Vec<Monomial>>,
}

impl TryFrom<RawSystem> for PolynomialSystem {
    type Error = Error;
    fn try_from(raw: RawSystem) -> Result<Self> {
        let p = PrimeModulus::new(raw.p)?;
        PolynomialSystem::new(p, raw.m, raw.n, raw.polys)
    }
}

impl PolynomialSystem {
    /// Build a system, reducing coefficients mod `p` and normalizing each
    /// polynomial to canonical form.
    pub fn new(
        modulus: PrimeModulus,
        m: usize,
        n: usize,
        polys: Vec<Vec<Monomial>>,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(
                "variable and polynomial counts must be at least 1".into(),
            ));
        }
        if polys.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: polys.len(),
            });
        }
        let p = modulus.get();
        let mut canon = Vec::with_capacity(n);
        for poly in polys {
            for mono in &poly {
                if mono.exponents.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: mono.exponents.len(),
                    });
                }
            }
            canon.push(normalize(poly, p));
        }
        Ok(PolynomialSystem {
            modulus,
            m,
            n,
            polys: canon,
        })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.modulus.get()
    }

    /// Number of variables.
    #[inline]
    pub fn var_count(&self) -> usize {
        self.m
    }

    /// Number of polynomials.
    #[inline]
    pub fn poly_count(&self) -> usize {
        self.n
    }

    pub fn polynomials(&self) -> &[Vec<Monomial>] {
        &self.polys
    }

    /// `p^m`, the number of domain points.
    pub fn domain_size(&self) -> Result<u64> {
        checked_pow(self.p(), self.m).ok_or(Error::DomainTooLarge {
            p: self.p(),
            m: self.m,
        })
    }

    /// Evaluate the system at `x`, returning `(G_1(x), ..., G_n(x))` with
    /// every value reduced into `[0, p)`.
    pub fn eval(&self, x: &[u64]) -> Result<Vec<u64>> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: x.len(),
            });
        }
        let p = self.p();
        for (i, &xi) in x.iter().enumerate() {
            if xi >= p {
                return Err(Error::CoordinateOutOfRange {
                    index: i,
                    value: xi,
                    p,
                });
            }
        }
        let mut out = vec![0u64; self.n];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    /// Evaluation without argument validation, for hot loops over the
    /// enumerated domain (which only yields in-range points).
    #[inline]
    pub fn eval_into(&self, x: &[u64], out: &mut [u64]) {
        debug_assert_eq!(x.len(), self.m);
        debug_assert_eq!(out.len(), self.n);
        let p = self.p();
        for (poly, slot) in self.polys.iter().zip(out.iter_mut()) {
            let mut acc = 0u64;
            for mono in poly {
                acc = add_mod(acc, mono.eval(x, p), p);
            }
            *slot = acc;
        }
    }

    /// Canonical text form, re-parseable by [`PolynomialSystem::parse`].
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = format!("p={}; m={}; n={}", self.p(), self.m, self.n);
        for (k, poly) in self.polys.iter().enumerate() {
            write!(s, "; G{} = ", k + 1).unwrap();
            if poly.is_empty() {
                s.push('0');
                continue;
            }
            for (i, mono) in poly.iter().enumerate() {
                if i > 0 {
                    s.push_str(" + ");
                }
                let is_constant = mono.exponents.iter().all(|&e| e == 0);
                if mono.coefficient != 1 || is_constant {
                    write!(s, "{}", mono.coefficient).unwrap();
                    if !is_constant {
                        s.push('*');
                    }
                }
                let mut first = true;
                for (j, &e) in mono.exponents.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    if !first {
                        s.push('*');
                    }
                    first = false;
                    write!(s, "X{}", j + 1).unwrap();
                    if e != 1 {
                        write!(s, "^{}", e).unwrap();
                    }
                }
            }
        }
        s
    }

    /// Parse the text grammar
    /// `p=<int>; m=<int>; n=<int>; G1 = <terms>; ...; Gn = <terms>` where a
    /// term is a `*`-product of an optional integer coefficient and factors
    /// `X<i>` or `X<i>^<e>`. Whitespace is ignored everywhere.
    pub fn parse(input: &str) -> Result<Self> {
        Parser::new(input).system()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("system serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse {
            position: e.column().saturating_sub(1),
            message: e.to_string(),
        })
    }
}

fn normalize(mut poly: Vec<Monomial>, p: u64) -> Vec<Monomial> {
    for mono in &mut poly {
        mono.coefficient %= p;
    }
    // Descending lexicographic exponent order puts higher-degree leading
    // variables first, e.g. X1 before X2 before the constant term.
    poly.sort_by(|a, b| b.exponents.cmp(&a.exponents));
    let mut out: Vec<Monomial> = Vec::with_capacity(poly.len());
    for mono in poly {
        match out.last_mut() {
            Some(last) if last.exponents == mono.exponents => {
                last.coefficient = add_mod(last.coefficient, mono.coefficient, p);
            }
            _ => out.push(mono),
        }
    }
    out.retain(|m| m.coefficient != 0);
    out
}

fn checked_pow(p: u64, m: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..m {
        acc = acc.checked_mul(p)?;
    }
    // Keep the total within i64 range so chunk arithmetic stays safe.
    if acc > i64::MAX as u64 {
        None
    } else {
        Some(acc)
    }
}

/// Named example families.
///
/// * `moments` with strictly increasing degrees `d_1 < ... < d_n < p` yields
///   `(X^d1, ..., X^dn)` in one variable.
/// * `kloosterman` yields `(X, X^(p-2))` in one variable; `X^(p-2)` equals
///   the modular inverse for nonzero arguments and 0 at 0.
pub fn builtin_system(name: &str, params: &[u64], p: PrimeModulus) -> Result<PolynomialSystem> {
    match name {
        "moments" => {
            if params.is_empty() {
                return Err(Error::InvalidBuiltin(
                    "moments requires at least one degree".into(),
                ));
            }
            for w in params.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidBuiltin(format!(
                        "degrees must be strictly increasing, got {} before {}",
                        w[0], w[1]
                    )));
                }
            }
            let d_max = *params.last().unwrap();
            if d_max >= p.get() {
                return Err(Error::InvalidBuiltin(format!(
                    "degree {} must be smaller than p = {}",
                    d_max, p
                )));
            }
            let polys = params
                .iter()
                .map(|&d| vec![Monomial::new(1, vec![d as u32])])
                .collect();
            PolynomialSystem::new(p, 1, params.len(), polys)
        }
        "kloosterman" => {
            if !params.is_empty() {
                return Err(Error::InvalidBuiltin(
                    "kloosterman takes no parameters".into(),
                ));
            }
            if p.get() < 3 {
                return Err(Error::InvalidBuiltin(
                    "kloosterman requires p >= 3".into(),
                ));
            }
            let polys = vec![
                vec![Monomial::new(1, vec![1])],
                vec![Monomial::new(1, vec![(p.get() - 2) as u32])],
            ];
            PolynomialSystem::new(p, 1, 2, polys)
        }
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

// ---------------------------------------------------------------------------
// Domain enumeration
// ---------------------------------------------------------------------------

/// The domain `F_p^m`, enumerable in lexicographic order. The order is part
/// of the contract: chunk boundaries are defined on linear indices, so
/// parallel consumers reduce in a reproducible order.
#[derive(Debug, Clone, Copy)]
pub struct Domain {
    p: u64,
    m: usize,
    size: u64,
}

/// Enumerate `F_p^m`; errors if `p^m` does not fit a 64-bit count.
pub fn enumerate_domain(p: PrimeModulus, m: usize) -> Result<Domain> {
    let size = checked_pow(p.get(), m).ok_or(Error::DomainTooLarge { p: p.get(), m })?;
    Ok(Domain {
        p: p.get(),
        m,
        size,
    })
}

impl Domain {
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn var_count(&self) -> usize {
        self.m
    }

    /// Decode a linear index into its lexicographic point.
    pub fn point_at(&self, mut index: u64) -> Vec<u64> {
        debug_assert!(index < self.size);
        let mut x = vec![0u64; self.m];
        for j in (0..self.m).rev() {
            x[j] = index % self.p;
            index /= self.p;
        }
        x
    }

    /// Visit every point in lexicographic order. The callback receives the
    /// linear index and the point.
    pub fn for_each_point<F: FnMut(u64, &[u64])>(&self, f: F) {
        self.chunk(0, self.size).for_each_point(f)
    }

    /// Split into contiguous chunks of at most `chunk_size` points.
    pub fn chunks(&self, chunk_size: u64) -> Vec<DomainChunk> {
        assert!(chunk_size > 0);
        let mut out = Vec::new();
        let mut start = 0;
        while start < self.size {
            let end = (start + chunk_size).min(self.size);
            out.push(self.chunk(start, end));
            start = end;
        }
        out
    }

    fn chunk(&self, start: u64, end: u64) -> DomainChunk {
        DomainChunk {
            p: self.p,
            m: self.m,
            start,
            end,
        }
    }

    pub fn iter(&self) -> DomainIter {
        DomainIter {
            chunk: self.chunk(0, self.size),
            next: 0,
            x: vec![0u64; self.m],
        }
    }
}

/// A contiguous index range `[start, end)` of the lexicographic enumeration.
#[derive(Debug, Clone, Copy)]
pub struct DomainChunk {
    p: u64,
    m: usize,
    start: u64,
    end: u64,
}

impl DomainChunk {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// Odometer walk over the chunk; avoids re-decoding every index.
    pub fn for_each_point<F: FnMut(u64, &[u64])>(&self, mut f: F) {
        if self.is_empty() {
            return;
        }
        let mut x = vec![0u64; self.m];
        let mut idx = self.start;
        for j in (0..self.m).rev() {
            x[j] = idx % self.p;
            idx /= self.p;
        }
        for index in self.start..self.end {
            f(index, &x);
            // increment the odometer
            for j in (0..self.m).rev() {
                x[j] += 1;
                if x[j] < self.p {
                    break;
                }
                x[j] = 0;
            }
        }
    }
}

pub struct DomainIter {
    chunk: DomainChunk,
    next: u64,
    x: Vec<u64>,
}

impl Iterator for DomainIter {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.next >= self.chunk.end {
            return None;
        }
        let out = self.x.clone();
        self.next += 1;
        for j in (0..self.chunk.m).rev() {
            self.x[j] += 1;
            if self.x[j] < self.chunk.p {
                break;
            }
            self.x[j] = 0;
        }
        Some(out)
    }
}

// ---------------------------------------------------------------------------
// Text parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser {
            bytes: input.as_bytes(),
            pos: 0,
        }
    }

    fn fail<T>(&self, pos: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(self.pos, format!("expected `{}`", c as char))
        }
    }

    fn uint(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        let mut value: u64 = 0;
        let mut seen = false;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            seen = true;
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u64))
                .ok_or(Error::Parse {
                    position: start,
                    message: "integer literal overflows 64 bits".into(),
                })?;
            self.pos += 1;
        }
        if !seen {
            return self.fail(start, "expected an integer");
        }
        Ok(value)
    }

    fn keyword_assign(&mut self, name: u8) -> Result<u64> {
        self.skip_ws();
        let pos = self.pos;
        if self.bytes.get(self.pos) != Some(&name) {
            return self.fail(pos, format!("expected `{}=`", name as char));
        }
        self.pos += 1;
        self.eat(b'=')?;
        self.uint()
    }

    fn system(&mut self) -> Result<PolynomialSystem> {
        let p_pos = {
            self.skip_ws();
            self.pos
        };
        let p_raw = self.keyword_assign(b'p')?;
        let modulus = PrimeModulus::new(p_raw).map_err(|_| Error::Parse {
            position: p_pos,
            message: format!("modulus {} is not prime", p_raw),
        })?;
        self.eat(b';')?;
        let m = self.keyword_assign(b'm')? as usize;
        self.eat(b';')?;
        let n = self.keyword_assign(b'n')? as usize;
        if m == 0 || n == 0 {
            return self.fail(self.pos, "m and n must be at least 1");
        }

        let mut polys = Vec::with_capacity(n);
        for k in 1..=n {
            self.eat(b';')?;
            self.skip_ws();
            let g_pos = self.pos;
            if self.bytes.get(self.pos) != Some(&b'G') {
                return self.fail(g_pos, format!("expected definition of G{}", k));
            }
            self.pos += 1;
            let idx = self.uint()?;
            if idx != k as u64 {
                return self.fail(g_pos, format!("expected G{}, found G{}", k, idx));
            }
            self.eat(b'=')?;
            polys.push(self.expr(m, modulus.get())?);
        }
        // allow one trailing separator
        if self.peek() == Some(b';') {
            self.pos += 1;
        }
        if self.peek().is_some() {
            return self.fail(self.pos, "trailing input after the last polynomial");
        }
        PolynomialSystem::new(modulus, m, n, polys)
    }

    fn expr(&mut self, m: usize, p: u64) -> Result<Vec<Monomial>> {
        let mut terms = Vec::new();
        let mut negate = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            negate = true;
        }
        loop {
            terms.push(self.term(m, p, negate)?);
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    negate = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    negate = true;
                }
                _ => break,
            }
        }
        Ok(terms)
    }

    fn term(&mut self, m: usize, p: u64, negate: bool) -> Result<Monomial> {
        let mut coeff: u64 = 1;
        let mut exponents = vec![0u32; m];
        let mut saw_factor = false;
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_digit() => {
                    let c = self.uint()?;
                    coeff = mul_mod(coeff, c % p, p);
                    saw_factor = true;
                }
                Some(b'X') => {
                    self.pos += 1;
                    let var_pos = self.pos - 1;
                    let i = self.uint()? as usize;
                    if i == 0 || i > m {
                        return self.fail(
                            var_pos,
                            format!("variable X{} out of range for m = {}", i, m),
                        );
                    }
                    let e = if self.peek() == Some(b'^') {
                        self.pos += 1;
                        self.uint()?
                    } else {
                        1
                    };
                    if e > u32::MAX as u64 {
                        return self.fail(var_pos, "exponent too large");
                    }
                    exponents[i - 1] = exponents[i - 1]
                        .checked_add(e as u32)
                        .ok_or(Error::Parse {
                            position: var_pos,
                            message: "exponent too large".into(),
                        })?;
                    saw_factor = true;
                }
                other => {
                    if !saw_factor {
                        let found = other
                            .map(|b| format!("`{}`", b as char))
                            .unwrap_or_else(|| "end of input".into());
                        return self.fail(self.pos, format!("expected a term, found {}", found));
                    }
                    break;
                }
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if negate {
            coeff = (p - coeff % p) % p;
        }
        Ok(Monomial::new(coeff, exponents))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(text: &str) -> PolynomialSystem {
        PolynomialSystem::parse(text).unwrap()
    }

    #[test]
    fn parse_basic_system() {
        let g = sys("p=5; m=2; n=2; G1 = X1 + X2; G2 = X1*X2");
        assert_eq!(g.p(), 5);
        assert_eq!(g.var_count(), 2);
        assert_eq!(g.poly_count(), 2);
        assert!(g
            .polynomials()
            .iter()
            .flatten()
            .all(|m| m.coefficient == 1));
    }

    #[test]
    fn parse_rejects_composite_modulus() {
        let err = PolynomialSystem::parse("p=4; m=1; n=1; G1 = X1").unwrap_err();
        match err {
            Error::Parse { position, message } => {
                assert_eq!(position, 0);
                assert!(message.contains("not prime"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_reduces_coefficients() {
        let g = sys("p=7; m=1; n=1; G1 = 9*X1^2");
        assert_eq!(g.polynomials()[0][0].coefficient, 2);
        assert_eq!(g.polynomials()[0][0].exponents, vec![2]);
    }

    #[test]
    fn parse_reports_position_of_bad_variable() {
        let err = PolynomialSystem::parse("p=5; m=2; n=1; G1 = X1 + X3").unwrap_err();
        match err {
            Error::Parse { position, .. } => assert_eq!(position, 25),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_whitespace_insensitive() {
        let a = sys("p=5;m=1;n=1;G1=2*X1^3+4");
        let b = sys("  p = 5 ;  m = 1 ; n = 1 ; G1 = 2 * X1 ^ 3 + 4  ");
        assert_eq!(a, b);
    }

    #[test]
    fn text_round_trip_is_identity_on_canonical_forms() {
        for text in [
            "p=5; m=2; n=2; G1 = X1 + X2; G2 = X1*X2",
            "p=7; m=1; n=1; G1 = 2*X1^2",
            "p=13; m=3; n=2; G1 = 5*X1^2*X3 + X2 + 9; G2 = 0",
        ] {
            let g = sys(text);
            let canon = g.to_text();
            let g2 = sys(&canon);
            assert_eq!(g, g2);
            assert_eq!(canon, g2.to_text());
        }
    }

    #[test]
    fn json_round_trip() {
        let g = sys("p=11; m=2; n=2; G1 = 3*X1^2 + X2; G2 = X1*X2 + 7");
        let j = g.to_json();
        assert!(j.contains("\"p\":11"));
        let g2 = PolynomialSystem::from_json(&j).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn json_rejects_exponent_length_mismatch() {
        let j = r#"{"p":5,"m":2,"n":1,"polys":[[{"c":1,"e":[1]}]]}"#;
        assert!(PolynomialSystem::from_json(j).is_err());
    }

    #[test]
    fn normalization_merges_and_drops() {
        let g = sys("p=5; m=1; n=1; G1 = X1 + X1 + 3*X1 + 5");
        // X1 + X1 + 3*X1 = 5*X1 = 0 mod 5, constant 5 = 0: everything vanishes.
        assert!(g.polynomials()[0].is_empty());
        assert_eq!(g.to_text(), "p=5; m=1; n=1; G1 = 0");
    }

    #[test]
    fn builtin_moments() {
        let p = PrimeModulus::new(5).unwrap();
        let g = builtin_system("moments", &[1, 2], p).unwrap();
        assert_eq!(g.to_text(), "p=5; m=1; n=2; G1 = X1; G2 = X1^2");
        assert!(builtin_system("moments", &[2, 2], p).is_err());
        assert!(builtin_system("moments", &[1, 7], p).is_err());
        assert!(builtin_system("nope", &[], p).is_err());
    }

    #[test]
    fn builtin_kloosterman() {
        let p = PrimeModulus::new(7).unwrap();
        let g = builtin_system("kloosterman", &[], p).unwrap();
        assert_eq!(g.to_text(), "p=7; m=1; n=2; G1 = X1; G2 = X1^5");
        // x=3: inverse of 3 mod 7 is 5.
        assert_eq!(g.eval(&[3]).unwrap(), vec![3, 5]);
        // x=0 maps to 0, not to 1: the Fermat reduction must skip base 0.
        assert_eq!(g.eval(&[0]).unwrap(), vec![0, 0]);
    }

    #[test]
    fn eval_examples() {
        let g = sys("p=5; m=2; n=2; G1 = X1 + X2; G2 = X1*X2");
        assert_eq!(g.eval(&[2, 3]).unwrap(), vec![0, 1]);
        let h = sys("p=7; m=1; n=2; G1 = X1; G2 = X1^3");
        assert_eq!(h.eval(&[2]).unwrap(), vec![2, 1]);
        assert!(matches!(
            g.eval(&[5, 0]),
            Err(Error::CoordinateOutOfRange { .. })
        ));
    }

    #[test]
    fn domain_enumeration_order_and_count() {
        let p = PrimeModulus::new(3).unwrap();
        let d = enumerate_domain(p, 2).unwrap();
        assert_eq!(d.size(), 9);
        let pts: Vec<Vec<u64>> = d.iter().collect();
        assert_eq!(pts[0], vec![0, 0]);
        assert_eq!(pts[1], vec![0, 1]);
        assert_eq!(pts[8], vec![2, 2]);
        let mut seen = std::collections::HashSet::new();
        for pt in &pts {
            assert!(seen.insert(pt.clone()));
        }
        assert_eq!(seen.len(), 9);

        let d1 = enumerate_domain(PrimeModulus::new(5).unwrap(), 1).unwrap();
        assert_eq!(d1.iter().count(), 5);
    }

    #[test]
    fn domain_overflow_detected() {
        let p = PrimeModulus::new(1_099_511_627_791).unwrap(); // ~2^40
        assert!(matches!(
            enumerate_domain(p, 2),
            Err(Error::DomainTooLarge { .. })
        ));
    }

    #[test]
    fn domain_chunks_cover_exactly() {
        let p = PrimeModulus::new(5).unwrap();
        let d = enumerate_domain(p, 2).unwrap();
        let chunks = d.chunks(7);
        assert_eq!(chunks.iter().map(|c| c.len()).sum::<u64>(), 25);
        let mut all = Vec::new();
        for c in &chunks {
            c.for_each_point(|idx, x| all.push((idx, x.to_vec())));
        }
        let mut reference = Vec::new();
        d.for_each_point(|idx, x| reference.push((idx, x.to_vec())));
        assert_eq!(all, reference);
    }

    #[test]
    fn pow_mod_edge_cases() {
        assert_eq!(pow_mod(0, 0, 7), 1);
        assert_eq!(pow_mod(0, 5, 7), 0);
        assert_eq!(pow_mod(3, 6, 7), 1); // Fermat
        assert_eq!(pow_mod(3, 7, 7), 3);
        assert_eq!(pow_mod(1, 999, 2), 1);
    }

    #[test]
    fn primality_spot_checks() {
        assert!(is_prime(2));
        assert!(is_prime(3));
        assert!(is_prime(2003));
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1));
        assert!(!is_prime(4));
        assert!(!is_prime(2001)); // 3 * 23 * 29
        assert!(!is_prime(25326001)); // strong pseudoprime to bases 2,3,5
    }
}
