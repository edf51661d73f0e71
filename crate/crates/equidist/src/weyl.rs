//! Complete exponential sums `S_G(v) = sum_x e_p(v . G(x))` and their full
//! spectrum over the representatives `v` in `[0,p)^n`.
//!
//! Two routes are kept deliberately independent:
//!
//! * [`weyl_sum_direct`] walks the domain once per frequency, reducing the
//!   integer phase `sum_j v_j G_j(x)` mod `p` exactly before a table lookup
//!   of the unit-circle value. No trigonometric recurrences, so it serves as
//!   the oracle for everything else.
//! * [`weyl_spectrum`] factorizes through the fibers of `G`: a count table
//!   over `F_p^n` followed by an n-dimensional length-`p` DFT. This is the
//!   fast path used by experiments.
//!
//! `S_G` is `p`-periodic in every coordinate of `v`, so the table over
//! `[0,p)^n` determines all integer frequencies.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dft::{unit_roots, PrimeDft};
use crate::ffpoly::{enumerate_domain, PolynomialSystem};
use crate::{Error, Result};

/// Fixed chunk length for parallel domain reductions. Chunk boundaries are a
/// function of the index range only, never of the thread count, so the
/// ordered re-combination of partial sums is reproducible.
const DOMAIN_CHUNK: u64 = 1 << 14;

/// Reduce an integer frequency vector to its canonical representative in
/// `[0,p)^n`.
pub fn canonical_frequency(v: &[i64], p: u64) -> Vec<u64> {
    v.iter()
        .map(|&c| {
            let r = c.rem_euclid(p as i64);
            r as u64
        })
        .collect()
}

/// `S_G(v)` by direct summation over the domain.
///
/// The phase argument is assembled in integer arithmetic mod `p`, then one
/// precomputed unit-circle value per point is accumulated. Partial sums over
/// fixed-size chunks are combined in chunk order.
pub fn weyl_sum_direct(system: &PolynomialSystem, v: &[i64]) -> Result<Complex64> {
    if v.len() != system.poly_count() {
        return Err(Error::DimensionMismatch {
            expected: system.poly_count(),
            got: v.len(),
        });
    }
    let p = system.p();
    let rep = canonical_frequency(v, p);
    let domain = enumerate_domain(system.modulus(), system.var_count())?;
    let roots = unit_roots(p as usize);

    let chunks = domain.chunks(DOMAIN_CHUNK);
    let partials: Vec<Complex64> = chunks
        .par_iter()
        .map(|chunk| {
            let mut g = vec![0u64; system.poly_count()];
            let mut acc = Complex64::new(0.0, 0.0);
            chunk.for_each_point(|_, x| {
                system.eval_into(x, &mut g);
                let mut phase = 0u64;
                for (&vj, &gj) in rep.iter().zip(&g) {
                    phase = crate::ffpoly::add_mod(phase, crate::ffpoly::mul_mod(vj, gj, p), p);
                }
                acc += roots[phase as usize];
            });
            acc
        })
        .collect();
    Ok(partials.into_iter().sum())
}

/// Count table over `F_p^n`: `counts[g] = #{x : G(x) = g}`.
#[derive(Debug, Clone)]
pub struct ValueHistogram {
    p: u64,
    m: usize,
    n: usize,
    counts: Vec<u64>,
}

impl ValueHistogram {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Row-major index of a value vector in `[0,p)^n`.
    pub fn index(&self, g: &[u64]) -> usize {
        debug_assert_eq!(g.len(), self.n);
        let mut idx = 0usize;
        for &c in g {
            debug_assert!(c < self.p);
            idx = idx * self.p as usize + c as usize;
        }
        idx
    }

    pub fn count(&self, g: &[u64]) -> u64 {
        self.counts[self.index(g)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn table_entries(p: u64, n: usize) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..n {
        acc = acc
            .checked_mul(p)
            .ok_or(Error::DomainTooLarge { p, m: n })?;
    }
    Ok(acc)
}

/// Build the value histogram of `G`. `max_entries` caps the `p^n` table.
pub fn value_histogram(system: &PolynomialSystem, max_entries: u64) -> Result<ValueHistogram> {
    let p = system.p();
    let n = system.poly_count();
    let entries = table_entries(p, n)?;
    if entries > max_entries {
        return Err(Error::BudgetExceeded {
            required: entries,
            budget: max_entries,
        });
    }
    let domain = enumerate_domain(system.modulus(), system.var_count())?;
    let mut counts = vec![0u64; entries as usize];
    let mut g = vec![0u64; n];
    domain.for_each_point(|_, x| {
        system.eval_into(x, &mut g);
        let mut idx = 0usize;
        for &c in &g {
            idx = idx * p as usize + c as usize;
        }
        counts[idx] += 1;
    });
    Ok(ValueHistogram {
        p,
        m: system.var_count(),
        n,
        counts,
    })
}

/// The table of `S_G(v)` over all representatives `v` in `[0,p)^n`,
/// row-major. Values at arbitrary integer frequencies follow by
/// periodicity.
#[derive(Debug, Clone)]
pub struct WeylSpectrum {
    p: u64,
    m: usize,
    n: usize,
    table: Vec<Complex64>,
}

impl WeylSpectrum {
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Number of domain variables of the underlying system.
    pub fn var_count(&self) -> usize {
        self.m
    }

    /// Number of polynomials, i.e. the torus dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `p^m`, which is also `S_G(0)`.
    pub fn domain_size(&self) -> f64 {
        (self.p as f64).powi(self.m as i32)
    }

    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    pub fn index(&self, rep: &[u64]) -> usize {
        debug_assert_eq!(rep.len(), self.n);
        let mut idx = 0usize;
        for &c in rep {
            debug_assert!(c < self.p);
            idx = idx * self.p as usize + c as usize;
        }
        idx
    }

    /// Decode a row-major index into its representative.
    pub fn rep_at(&self, mut idx: usize) -> Vec<u64> {
        let mut rep = vec![0u64; self.n];
        for j in (0..self.n).rev() {
            rep[j] = (idx % self.p as usize) as u64;
            idx /= self.p as usize;
        }
        rep
    }

    /// `S_G(v)` for any integer frequency, via the periodicity rule.
    pub fn value(&self, v: &[i64]) -> Complex64 {
        let rep = canonical_frequency(v, self.p);
        self.table[self.index(&rep)]
    }

    pub fn value_at_rep(&self, rep: &[u64]) -> Complex64 {
        self.table[self.index(rep)]
    }

    /// Largest `|S_G(v)|` over nonzero representatives, with the first
    /// (lexicographically) attaining representative. `None` when `p^n = 1`.
    pub fn max_nontrivial(&self) -> Option<(f64, Vec<u64>)> {
        let mut best: Option<(f64, usize)> = None;
        for (idx, z) in self.table.iter().enumerate().skip(1) {
            let a = z.norm();
            match best {
                Some((b, _)) if a <= b => {}
                _ => best = Some((a, idx)),
            }
        }
        best.map(|(a, idx)| (a, self.rep_at(idx)))
    }

    /// CSV export with columns `v_1..v_n, re, im, abs`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        for j in 0..self.n {
            write!(w, "v_{},", j + 1)?;
        }
        writeln!(w, "re,im,abs")?;
        for (idx, z) in self.table.iter().enumerate() {
            let rep = self.rep_at(idx);
            for c in rep {
                write!(w, "{},", c)?;
            }
            writeln!(w, "{},{},{}", z.re, z.im, z.norm())?;
        }
        Ok(())
    }
}

/// Full spectrum as the n-dimensional DFT of the value histogram.
pub fn weyl_spectrum(system: &PolynomialSystem, max_entries: u64) -> Result<WeylSpectrum> {
    let hist = value_histogram(system, max_entries)?;
    Ok(spectrum_from_histogram(&hist))
}

pub fn spectrum_from_histogram(hist: &ValueHistogram) -> WeylSpectrum {
    let p = hist.p as usize;
    let n = hist.n;
    let mut data: Vec<Complex64> = hist
        .counts
        .iter()
        .map(|&c| Complex64::new(c as f64, 0.0))
        .collect();
    let dft = PrimeDft::new(p);
    let total = data.len();

    for axis in 0..n {
        let stride = p.pow((n - 1 - axis) as u32);
        let block = stride * p;
        let line_count = total / p;
        // Gather each length-p line, transform, scatter back. Lines are
        // independent; the parallel map preserves line order.
        let transformed: Vec<Vec<Complex64>> = (0..line_count)
            .into_par_iter()
            .map(|line| {
                let base = (line / stride) * block + (line % stride);
                let mut buf = Vec::with_capacity(p);
                for k in 0..p {
                    buf.push(data[base + k * stride]);
                }
                let mut out = vec![Complex64::new(0.0, 0.0); p];
                dft.transform(&buf, &mut out);
                out
            })
            .collect();
        for (line, out) in transformed.into_iter().enumerate() {
            let base = (line / stride) * block + (line % stride);
            for (k, z) in out.into_iter().enumerate() {
                data[base + k * stride] = z;
            }
        }
    }

    WeylSpectrum {
        p: hist.p,
        m: hist.m,
        n,
        table: data,
    }
}

// ---------------------------------------------------------------------------
// Type exponent estimation
// ---------------------------------------------------------------------------

/// Magnitudes at or below this fraction of `p^m` count as exactly vanishing
/// when deciding whether any nontrivial sum survives.
const VANISHING_FRACTION: f64 = 1e-9;

/// An estimated decay exponent. When every nontrivial sum vanishes the
/// exponent is unbounded below `n`, reported as the sentinel rather than
/// infinity (the `p^-n` branch of the decay classification never binds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaValue {
    Measured(f64),
    AtLeastDimension,
}

impl EtaValue {
    /// `min(eta, n)`, the quantity entering every bound downstream.
    pub fn effective(&self, n: usize) -> f64 {
        match self {
            EtaValue::Measured(e) => e.min(n as f64),
            EtaValue::AtLeastDimension => n as f64,
        }
    }
}

impl Serialize for EtaValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EtaValue::Measured(x) => s.serialize_f64(*x),
            EtaValue::AtLeastDimension => s.serialize_str(">=n"),
        }
    }
}

impl<'de> Deserialize<'de> for EtaValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = EtaValue;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or the string \">=n\"")
            }
            fn visit_f64<E: serde::de::Error>(self, x: f64) -> std::result::Result<EtaValue, E> {
                Ok(EtaValue::Measured(x))
            }
            fn visit_u64<E: serde::de::Error>(self, x: u64) -> std::result::Result<EtaValue, E> {
                Ok(EtaValue::Measured(x as f64))
            }
            fn visit_i64<E: serde::de::Error>(self, x: i64) -> std::result::Result<EtaValue, E> {
                Ok(EtaValue::Measured(x as f64))
            }
            fn visit_str<E: serde::de::Error>(self, s: &str) -> std::result::Result<EtaValue, E> {
                if s == ">=n" {
                    Ok(EtaValue::AtLeastDimension)
                } else {
                    Err(E::custom("expected \">=n\""))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Per-prime exponent estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaPoint {
    pub prime: u64,
    pub eta_hat: EtaValue,
    /// Representative achieving the maximal nontrivial magnitude, if any.
    pub argmax_v: Option<Vec<u64>>,
    /// That magnitude, normalized by `p^m`.
    pub max_nontrivial: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaReport {
    pub family: String,
    pub points: Vec<EtaPoint>,
    pub minimum: EtaValue,
}

/// Estimate the decay exponent of a builtin family over a prime sweep:
/// `eta_hat(p) = m - log_p(max |S_G(v)| over v not in pZ^n)`.
pub fn eta_estimate(
    builtin: &str,
    params: &[u64],
    primes: &[u64],
    max_entries: u64,
) -> Result<EtaReport> {
    if primes.is_empty() {
        return Err(Error::EmptyInput("prime list"));
    }
    let mut points = Vec::with_capacity(primes.len());
    for &p in primes {
        let modulus = crate::ffpoly::PrimeModulus::new(p)?;
        let system = crate::ffpoly::builtin_system(builtin, params, modulus)?;
        let spectrum = weyl_spectrum(&system, max_entries)?;
        points.push(eta_point(&spectrum, p));
    }
    let minimum = points
        .iter()
        .filter_map(|pt| match pt.eta_hat {
            EtaValue::Measured(e) => Some(e),
            EtaValue::AtLeastDimension => None,
        })
        .fold(None, |acc: Option<f64>, e| {
            Some(acc.map_or(e, |a| a.min(e)))
        })
        .map(EtaValue::Measured)
        .unwrap_or(EtaValue::AtLeastDimension);
    let family = if params.is_empty() {
        builtin.to_string()
    } else {
        format!(
            "{}:{}",
            builtin,
            params
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    };
    Ok(EtaReport {
        family,
        points,
        minimum,
    })
}

/// Exponent estimate from an already-computed spectrum.
pub fn eta_point(spectrum: &WeylSpectrum, prime: u64) -> EtaPoint {
    let pm = spectrum.domain_size();
    match spectrum.max_nontrivial() {
        Some((max_abs, argmax)) if max_abs > VANISHING_FRACTION * pm => {
            let eta = spectrum.var_count() as f64 - max_abs.ln() / (prime as f64).ln();
            EtaPoint {
                prime,
                eta_hat: EtaValue::Measured(eta),
                argmax_v: Some(argmax),
                max_nontrivial: max_abs / pm,
            }
        }
        other => EtaPoint {
            prime,
            eta_hat: EtaValue::AtLeastDimension,
            argmax_v: None,
            max_nontrivial: other.map(|(a, _)| a / pm).unwrap_or(0.0),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::PrimeModulus;
    use approx::assert_abs_diff_eq;

    fn sys(text: &str) -> PolynomialSystem {
        PolynomialSystem::parse(text).unwrap()
    }

    const CAP: u64 = 1 << 22;

    #[test]
    fn zero_frequency_counts_the_domain() {
        let g = sys("p=7; m=2; n=2; G1 = X1*X2; G2 = X1 + 3*X2^2");
        let s = weyl_sum_direct(&g, &[0, 0]).unwrap();
        assert_abs_diff_eq!(s.re, 49.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn linear_character_sum_vanishes() {
        let g = sys("p=5; m=1; n=2; G1 = X1; G2 = X1^2");
        let s = weyl_sum_direct(&g, &[1, 0]).unwrap();
        assert!(s.norm() < 1e-12 * 5.0);
    }

    #[test]
    fn gauss_sum_magnitude() {
        let g = sys("p=5; m=1; n=2; G1 = X1; G2 = X1^2");
        let s = weyl_sum_direct(&g, &[0, 1]).unwrap();
        assert_abs_diff_eq!(s.norm(), 5f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn product_domain_orthogonality() {
        let g = sys("p=5; m=2; n=2; G1 = X1; G2 = X2");
        let s = weyl_sum_direct(&g, &[1, 1]).unwrap();
        assert!(s.norm() < 1e-9 * 25.0);
    }

    #[test]
    fn histogram_of_graph_is_unitary() {
        let g = sys("p=5; m=1; n=2; G1 = X1; G2 = X1^2");
        let h = value_histogram(&g, CAP).unwrap();
        assert_eq!(h.total(), 5);
        for x in 0u64..5 {
            assert_eq!(h.count(&[x, (x * x) % 5]), 1);
        }
        assert_eq!(h.count(&[0, 1]), 0);
    }

    #[test]
    fn histogram_of_full_grid_is_flat() {
        let g = sys("p=3; m=2; n=2; G1 = X1; G2 = X2");
        let h = value_histogram(&g, CAP).unwrap();
        assert!(h.counts().iter().all(|&c| c == 1));
        assert_eq!(h.total(), 9);
    }

    #[test]
    fn histogram_budget_enforced() {
        let g = sys("p=31; m=1; n=2; G1 = X1; G2 = X1^2");
        assert!(matches!(
            value_histogram(&g, 100),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn spectrum_agrees_with_direct_path() {
        let g = sys("p=5; m=1; n=2; G1 = X1; G2 = X1^2");
        let spec = weyl_spectrum(&g, CAP).unwrap();
        for v1 in 0i64..5 {
            for v2 in 0i64..5 {
                let direct = weyl_sum_direct(&g, &[v1, v2]).unwrap();
                let fast = spec.value(&[v1, v2]);
                assert!(
                    (direct - fast).norm() <= 1e-10 * 5.0,
                    "v=({v1},{v2}): {direct} vs {fast}"
                );
            }
        }
    }

    #[test]
    fn spectrum_zero_entry_and_bound() {
        let g = sys("p=11; m=2; n=1; G1 = X1*X2 + X2^2");
        let spec = weyl_spectrum(&g, CAP).unwrap();
        let pm = 121.0;
        assert_abs_diff_eq!(spec.value(&[0]).re, pm, epsilon = 1e-9);
        assert_abs_diff_eq!(spec.value(&[0]).im, 0.0, epsilon = 1e-9);
        for idx in 0..spec.table().len() {
            assert!(spec.table()[idx].norm() <= pm + 1e-9);
        }
    }

    #[test]
    fn spectrum_conjugate_symmetry() {
        let g = sys("p=7; m=1; n=2; G1 = X1; G2 = 3*X1^3");
        let spec = weyl_spectrum(&g, CAP).unwrap();
        for v1 in 0i64..7 {
            for v2 in 0i64..7 {
                let a = spec.value(&[v1, v2]);
                let b = spec.value(&[-v1, -v2]);
                assert!((a - b.conj()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn parseval_ties_spectrum_to_histogram() {
        let g = sys("p=7; m=1; n=2; G1 = X1; G2 = X1^5");
        let h = value_histogram(&g, CAP).unwrap();
        let spec = spectrum_from_histogram(&h);
        let lhs: f64 = spec.table().iter().map(|z| z.norm_sqr()).sum();
        let rhs: f64 = 49.0 * h.counts().iter().map(|&c| (c * c) as f64).sum::<f64>();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-6 * rhs);
    }

    #[test]
    fn periodicity_under_integer_shifts() {
        let g = sys("p=5; m=1; n=2; G1 = X1; G2 = X1^2");
        let base = weyl_sum_direct(&g, &[2, 3]).unwrap();
        for shift in [[5i64, 0], [0, -5], [10, 15], [-5, 5]] {
            let s = weyl_sum_direct(&g, &[2 + shift[0], 3 + shift[1]]).unwrap();
            assert!((s - base).norm() <= 1e-9 * 5.0);
        }
    }

    #[test]
    fn eta_gauss_family_is_half() {
        let report = eta_estimate("moments", &[1, 2], &[5, 13, 29], CAP).unwrap();
        for pt in &report.points {
            match pt.eta_hat {
                EtaValue::Measured(e) => assert_abs_diff_eq!(e, 0.5, epsilon = 1e-9),
                _ => panic!("expected a measured exponent"),
            }
        }
        assert_eq!(report.minimum, EtaValue::Measured(0.5));
        assert_eq!(report.family, "moments:1,2");
    }

    #[test]
    fn eta_sentinel_for_vanishing_spectrum() {
        // Full product grid: every nontrivial sum is exactly zero.
        let g = sys("p=5; m=2; n=2; G1 = X1; G2 = X2");
        let spec = weyl_spectrum(&g, CAP).unwrap();
        let pt = eta_point(&spec, 5);
        assert_eq!(pt.eta_hat, EtaValue::AtLeastDimension);
        assert!(pt.argmax_v.is_none());
        assert_eq!(pt.eta_hat.effective(2), 2.0);
    }

    #[test]
    fn eta_requires_primes() {
        assert!(matches!(
            eta_estimate("moments", &[1, 2], &[], CAP),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn eta_value_serde_round_trip() {
        let m = serde_json::to_string(&EtaValue::Measured(0.5)).unwrap();
        assert_eq!(m, "0.5");
        let s = serde_json::to_string(&EtaValue::AtLeastDimension).unwrap();
        assert_eq!(s, "\">=n\"");
        assert_eq!(
            serde_json::from_str::<EtaValue>("0.5").unwrap(),
            EtaValue::Measured(0.5)
        );
        assert_eq!(
            serde_json::from_str::<EtaValue>("\">=n\"").unwrap(),
            EtaValue::AtLeastDimension
        );
    }

    #[test]
    fn frequency_vector_dimension_checked() {
        let g = sys("p=5; m=1; n=2; G1 = X1; G2 = X1^2");
        assert!(matches!(
            weyl_sum_direct(&g, &[1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
