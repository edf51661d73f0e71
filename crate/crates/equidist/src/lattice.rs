//! Lattice point counting on spheres and balls, band zeta sums, and
//! explicit tail bounds.
//!
//! Everything is organized around integer norm-squares: the vectors with
//! `a < |v| <= b` are exactly those with `|v|^2` in an integer interval, so
//! band membership never touches floating-point square roots. Band edges are
//! squared in exact rational arithmetic (every `f64` is a dyadic rational),
//! which pins boundary shells deterministically.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::weyl::WeylSpectrum;
use crate::{Error, Result};

/// Cap on the largest norm-square a band enumeration may touch.
pub const DEFAULT_SHELL_BUDGET: u64 = 1 << 26;

/// A radial band `a < |v| <= b`; `b` may be infinite only where a closed-form
/// tail bound is taken instead of an enumeration.
#[derive(Debug, Clone)]
pub struct Band {
    a: f64,
    b: Option<f64>,
    a_sq: BigRational,
    b_sq: Option<BigRational>,
}

fn exact_square(x: f64) -> BigRational {
    let r = BigRational::from_f64(x).expect("finite float");
    &r * &r
}

impl Band {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= a) {
            return Err(Error::InvalidArgument(format!(
                "band requires 0 <= a <= b, got a = {}, b = {}",
                a, b
            )));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument("band edges must be finite".into()));
        }
        Ok(Band {
            a,
            b: Some(b),
            a_sq: exact_square(a),
            b_sq: Some(exact_square(b)),
        })
    }

    /// The unbounded band `a < |v|`.
    pub fn tail(a: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tail band requires finite a >= 0, got {}",
                a
            )));
        }
        Ok(Band {
            a,
            b: None,
            a_sq: exact_square(a),
            b_sq: None,
        })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> Option<f64> {
        self.b
    }

    /// Integer norm-square range `(k_min ..= k_max)` covered by the band;
    /// errors on an infinite upper edge. Empty bands return `(1, 0)`.
    pub fn shell_range(&self) -> Result<(u64, u64)> {
        let b_sq = self
            .b_sq
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("band is unbounded".into()))?;
        // smallest integer strictly greater than a^2
        let floor_a = self.a_sq.floor().to_integer();
        let k_min_big = if BigRational::from_integer(floor_a.clone()) == self.a_sq {
            floor_a + 1
        } else {
            self.a_sq.ceil().to_integer()
        };
        let k_max_big = b_sq.floor().to_integer();
        if k_max_big < k_min_big || k_max_big.is_negative() {
            return Ok((1, 0));
        }
        let k_min = k_min_big
            .max(BigInt::from(1u32))
            .to_u64()
            .ok_or_else(|| Error::InvalidArgument("band lower edge out of range".into()))?;
        let k_max = k_max_big
            .to_u64()
            .ok_or_else(|| Error::InvalidArgument("band upper edge out of range".into()))?;
        Ok((k_min, k_max))
    }
}

fn isqrt(k: u64) -> u64 {
    if k == 0 {
        return 0;
    }
    let mut r = (k as f64).sqrt() as u64;
    while (r + 1) * (r + 1) <= k {
        r += 1;
    }
    while r * r > k {
        r -= 1;
    }
    r
}

/// `r_n(k)`: the number of integer vectors with `|v|^2 = k`, by recursion
/// over the first coordinate.
pub fn sum_of_squares(n: usize, k: u64) -> u64 {
    assert!(n >= 1);
    if n == 1 {
        if k == 0 {
            return 1;
        }
        let r = isqrt(k);
        return if r * r == k { 2 } else { 0 };
    }
    let r = isqrt(k);
    let mut count = sum_of_squares(n - 1, k);
    for a in 1..=r {
        count += 2 * sum_of_squares(n - 1, k - a * a);
    }
    count
}

/// `R_n(K)`: lattice points with `|v|^2 <= K`.
pub fn lattice_ball_count(n: usize, k_cap: u64) -> u64 {
    let mut counts = vec![0u64; k_cap as usize + 1];
    for_each_point(n, 0, k_cap, |_, k| counts[k as usize] += 1);
    counts.iter().sum()
}

/// Visit every integer vector with `k_min <= |v|^2 <= k_max`, in
/// lexicographic coordinate order. The callback receives the vector and its
/// norm-square.
pub fn for_each_point<F: FnMut(&[i64], u64)>(n: usize, k_min: u64, k_max: u64, mut f: F) {
    assert!(n >= 1);
    if k_max < k_min {
        return;
    }
    let mut coords = vec![0i64; n];
    recurse(&mut coords, 0, 0, k_min, k_max, &mut f);

    fn recurse<F: FnMut(&[i64], u64)>(
        coords: &mut [i64],
        depth: usize,
        partial: u64,
        k_min: u64,
        k_max: u64,
        f: &mut F,
    ) {
        let remaining = k_max - partial;
        let bound = isqrt(remaining) as i64;
        if depth == coords.len() - 1 {
            for a in -bound..=bound {
                let k = partial + (a * a) as u64;
                if k >= k_min {
                    coords[depth] = a;
                    f(coords, k);
                }
            }
            return;
        }
        for a in -bound..=bound {
            coords[depth] = a;
            recurse(coords, depth + 1, partial + (a * a) as u64, k_min, k_max, f);
        }
    }
}

/// Per-shell counts `r_n(k)` for `k` in `[k_min, k_max]`, via one
/// enumeration pass.
pub fn shell_counts(n: usize, k_min: u64, k_max: u64) -> Vec<u64> {
    if k_max < k_min {
        return Vec::new();
    }
    let mut counts = vec![0u64; (k_max - k_min + 1) as usize];
    for_each_point(n, k_min, k_max, |_, k| counts[(k - k_min) as usize] += 1);
    counts
}

fn check_budget(k_max: u64) -> Result<()> {
    if k_max > DEFAULT_SHELL_BUDGET {
        return Err(Error::BudgetExceeded {
            required: k_max,
            budget: DEFAULT_SHELL_BUDGET,
        });
    }
    Ok(())
}

/// The per-shell term `r_n(k) * k^(-s/2)` as (count, f64 weight). The weight
/// is the single rounding in the whole sum; both zeta routes below share it.
fn shell_term(k: u64, s: f64) -> f64 {
    (k as f64).powf(-s / 2.0)
}

/// Band zeta `sum_{a < |v| <= b} |v|^(-s)`, shells accumulated in increasing
/// norm-square order. Exact to within accumulation rounding; see
/// [`zeta_band_exact`] for the rational-arithmetic value.
pub fn zeta_band(n: usize, band: &Band, s: f64) -> Result<f64> {
    let (k_min, k_max) = band.shell_range()?;
    if k_max < k_min {
        return Ok(0.0);
    }
    check_budget(k_max)?;
    let counts = shell_counts(n, k_min, k_max);
    let mut sum = 0.0f64;
    for (off, &r) in counts.iter().enumerate() {
        if r > 0 {
            sum += r as f64 * shell_term(k_min + off as u64, s);
        }
    }
    Ok(sum)
}

/// Band zeta as an exact rational: each shell contributes the dyadic
/// rational `r_n(k) * fl(k^(-s/2))` exactly, so sums over a partition of
/// bands add without any rounding at all. This is what makes
/// `zeta(a,b) + zeta(b,c) = zeta(a,c)` hold exactly.
pub fn zeta_band_exact(n: usize, band: &Band, s: f64) -> Result<BigRational> {
    let (k_min, k_max) = band.shell_range()?;
    let mut sum = BigRational::zero();
    if k_max < k_min {
        return Ok(sum);
    }
    check_budget(k_max)?;
    let counts = shell_counts(n, k_min, k_max);
    for (off, &r) in counts.iter().enumerate() {
        if r > 0 {
            let term = BigRational::from_f64(shell_term(k_min + off as u64, s))
                .expect("finite shell term");
            sum += term * BigRational::from_u64(r).unwrap();
        }
    }
    Ok(sum)
}

/// Spectrum-weighted band sum `sum_{a < |v| <= b} |S(v)|^c / (p^(cm) |v|^s)`,
/// using the periodicity `S(v) = S(v mod p)`.
pub fn zeta_weyl_band(
    spectrum: &WeylSpectrum,
    band: &Band,
    s: f64,
    c: f64,
) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "weight exponent must be positive, got {}",
            c
        )));
    }
    let (k_min, k_max) = band.shell_range()?;
    if k_max < k_min {
        return Ok(0.0);
    }
    check_budget(k_max)?;
    let n = spectrum.n();
    let p = spectrum.p() as i64;
    let norm = spectrum.domain_size().powf(c);
    // |S|^c at every representative, computed once.
    let weights: Vec<f64> = spectrum
        .table()
        .iter()
        .map(|z| z.norm().powf(c) / norm)
        .collect();
    let mut sum = 0.0f64;
    let mut rep = vec![0u64; n];
    for_each_point(n, k_min, k_max, |v, k| {
        for (r, &vi) in rep.iter_mut().zip(v) {
            *r = vi.rem_euclid(p) as u64;
        }
        let idx = spectrum.index(&rep);
        let w = weights[idx];
        if w != 0.0 {
            sum += w * shell_term(k, s);
        }
    });
    Ok(sum)
}

/// Rigorous upper bound for the infinite tail `zeta_{n,a,infinity}(s)` of
/// the form `C(n,s,a) * a^(n-s)`, requiring `s > n` and `a >= 1`.
///
/// Derivation: grouping by shells and applying Abel summation,
///
/// ```text
/// zeta = lim_b [ R_n(b^2) b^-s - R_n(a^2) a^-s + (s/2) int_{a^2}^{b^2} R_n(x) x^(-s/2-1) dx ]
/// ```
///
/// Every unit cube centered at a lattice point inside the ball of radius
/// sqrt(x) lies in the ball of radius sqrt(x) + sqrt(n)/2, so
/// `R_n(x) <= V_n (sqrt(x) + sqrt(n))^n` where `V_n` is the unit-ball
/// volume. Dropping the negative term, using the boundedness of the first,
/// and integrating:
///
/// ```text
/// zeta <= (s/(s-n)) * V_n * (1 + sqrt(n)/a)^n * a^(n-s)
/// ```
pub fn tail_bound(n: usize, a: f64, s: f64) -> Result<f64> {
    if s <= n as f64 {
        return Err(Error::DivergentTail { n, s });
    }
    if !(a >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail bound requires a >= 1, got {}",
            a
        )));
    }
    let v_n = crate::torus::ball_volume(n, 1.0);
    let c = s / (s - n as f64) * v_n * (1.0 + (n as f64).sqrt() / a).powi(n as i32);
    Ok(c * a.powf(n as f64 - s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::PolynomialSystem;
    use crate::weyl::weyl_spectrum;
    use approx::assert_abs_diff_eq;

    /// Dumb box-enumeration oracle for r_n(k).
    fn brute_sphere_count(n: usize, k: u64) -> u64 {
        let bound = isqrt(k) as i64;
        let mut count = 0u64;
        let mut coords = vec![-bound; n];
        'outer: loop {
            let ksq: u64 = coords.iter().map(|&c| (c * c) as u64).sum();
            if ksq == k {
                count += 1;
            }
            let mut j = n;
            loop {
                if j == 0 {
                    break 'outer;
                }
                j -= 1;
                coords[j] += 1;
                if coords[j] <= bound {
                    break;
                }
                coords[j] = -bound;
            }
        }
        count
    }

    #[test]
    fn sphere_counts_match_brute_force_samples() {
        for n in [2usize, 3] {
            for k in [0u64, 1, 2, 3, 4, 5, 25, 90, 91, 325, 1000] {
                assert_eq!(
                    sum_of_squares(n, k),
                    brute_sphere_count(n, k),
                    "n = {n}, k = {k}"
                );
            }
        }
    }

    #[test]
    fn named_sphere_counts() {
        assert_eq!(sum_of_squares(2, 0), 1);
        assert_eq!(sum_of_squares(3, 1), 6);
        assert_eq!(sum_of_squares(2, 25), 12);
        assert_eq!(sum_of_squares(2, 3), 0);
    }

    #[test]
    fn ball_counts() {
        assert_eq!(lattice_ball_count(2, 0), 1);
        assert_eq!(lattice_ball_count(2, 2), 9);
        assert_eq!(lattice_ball_count(3, 1), 7);
    }

    #[test]
    fn ball_count_approaches_volume() {
        // R_n(K) / K^(n/2) -> unit-ball volume; within 5% at K = 10^4, n = 2.
        let k = 10_000u64;
        let got = lattice_ball_count(2, k) as f64 / (k as f64);
        let want = std::f64::consts::PI;
        assert!((got - want).abs() / want < 0.05, "{got} vs {want}");
    }

    #[test]
    fn enumeration_agrees_with_shell_counts() {
        let counts = shell_counts(3, 5, 30);
        for (off, &r) in counts.iter().enumerate() {
            assert_eq!(r, sum_of_squares(3, 5 + off as u64));
        }
    }

    #[test]
    fn zeta_band_axis_shell() {
        // only the four axis vectors lie in 0 < |v| <= 1
        let band = Band::new(0.0, 1.0).unwrap();
        for &s in &[0.5, 2.0, 7.3] {
            assert_abs_diff_eq!(zeta_band(2, &band, s).unwrap(), 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zeta_band_through_sqrt2() {
        // shells k = 1, 2: 4 * 1 + 4 * (1/2) = 6 at s = 2
        let band = Band::new(0.0, 2f64.sqrt()).unwrap();
        assert_abs_diff_eq!(zeta_band(2, &band, 2.0).unwrap(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn zeta_band_empty() {
        let band = Band::new(1.5, 1.5).unwrap();
        assert_eq!(zeta_band(2, &band, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn zeta_band_additivity_is_exact() {
        let s = 2.7;
        for n in [2usize, 3] {
            let ab = Band::new(0.0, 7.3).unwrap();
            let bc = Band::new(7.3, 20.0).unwrap();
            let ac = Band::new(0.0, 20.0).unwrap();
            let lhs = zeta_band_exact(n, &ab, s).unwrap() + zeta_band_exact(n, &bc, s).unwrap();
            let rhs = zeta_band_exact(n, &ac, s).unwrap();
            assert_eq!(lhs, rhs, "n = {n}");
        }
        // boundary lands exactly on a shell: |v| = 5 belongs to the left band
        let left = Band::new(0.0, 5.0).unwrap();
        let right = Band::new(5.0, 9.0).unwrap();
        let all = Band::new(0.0, 9.0).unwrap();
        let lhs =
            zeta_band_exact(2, &left, s).unwrap() + zeta_band_exact(2, &right, s).unwrap();
        assert_eq!(lhs, zeta_band_exact(2, &all, s).unwrap());
        let (_, k_max_left) = left.shell_range().unwrap();
        assert_eq!(k_max_left, 25);
        let (k_min_right, _) = right.shell_range().unwrap();
        assert_eq!(k_min_right, 26);
    }

    #[test]
    fn zeta_band_f64_matches_exact_to_rounding() {
        let band = Band::new(0.5, 14.0).unwrap();
        let fast = zeta_band(2, &band, 3.0).unwrap();
        let exact = zeta_band_exact(2, &band, 3.0).unwrap().to_f64().unwrap();
        assert_abs_diff_eq!(fast, exact, epsilon = 1e-12 * exact.abs());
    }

    #[test]
    fn zeta_weyl_uniform_grid_vanishes() {
        let g = PolynomialSystem::parse("p=5; m=2; n=2; G1 = X1; G2 = X2").unwrap();
        let spec = weyl_spectrum(&g, 1 << 20).unwrap();
        let band = Band::new(0.0, 4.0).unwrap(); // 0 < |v| <= p - 1
        let z = zeta_weyl_band(&spec, &band, 1.0, 2.0).unwrap();
        assert!(z.abs() < 1e-12);
    }

    #[test]
    fn zeta_weyl_small_weight_limit_and_trivial_bound() {
        let g = PolynomialSystem::parse("p=5; m=1; n=2; G1 = X1; G2 = X1^2").unwrap();
        let spec = weyl_spectrum(&g, 1 << 20).unwrap();
        let band = Band::new(0.0, 3.0).unwrap();
        let s = 1.3;
        // weights approach 1 as c -> 0 only where S != 0; instead check the
        // trivial bound: value <= (max_v |S|/p^m)^c * zeta_band.
        let c = 2.0;
        let z = zeta_weyl_band(&spec, &band, s, c).unwrap();
        let max_ratio: f64 = spec
            .table()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            / spec.domain_size();
        let bound = max_ratio.powf(c) * zeta_band(2, &band, s).unwrap();
        assert!(z <= bound + 1e-12, "{z} vs {bound}");
        assert!(z > 0.0);
    }

    #[test]
    fn zeta_weyl_exhaustive_check_small_prime() {
        // direct re-computation over the 25-entry spectrum
        let g = PolynomialSystem::parse("p=5; m=1; n=2; G1 = X1; G2 = X1^2").unwrap();
        let spec = weyl_spectrum(&g, 1 << 20).unwrap();
        let band = Band::new(0.0, 3.0).unwrap();
        let got = zeta_weyl_band(&spec, &band, 0.0, 2.0).unwrap();
        let mut want = 0.0;
        for v1 in -3i64..=3 {
            for v2 in -3i64..=3 {
                let ksq = v1 * v1 + v2 * v2;
                if ksq > 0 && ksq <= 9 {
                    want += spec.value(&[v1, v2]).norm_sqr() / 625.0;
                }
            }
        }
        assert_abs_diff_eq!(got, want, epsilon = 1e-9);
    }

    #[test]
    fn tail_bound_dominates_partial_sums() {
        for &(n, s, a) in &[(2usize, 4.0, 10.0), (2, 3.0, 1.0), (3, 5.5, 7.0)] {
            let bound = tail_bound(n, a, s).unwrap();
            for &b in &[a + 1.0, a * 3.0, 100.0] {
                let partial = zeta_band(n, &Band::new(a, b).unwrap(), s).unwrap();
                assert!(
                    partial <= bound,
                    "n={n} s={s} a={a} b={b}: partial {partial} > bound {bound}"
                );
            }
        }
    }

    #[test]
    fn tail_bound_monotone_in_a() {
        let mut prev = f64::INFINITY;
        for &a in &[1.0, 2.0, 5.0, 10.0, 100.0] {
            let b = tail_bound(2, a, 4.0).unwrap();
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn tail_bound_rejects_divergent_exponents() {
        assert!(matches!(
            tail_bound(2, 10.0, 2.0),
            Err(Error::DivergentTail { .. })
        ));
        assert!(matches!(
            tail_bound(3, 10.0, 3.0),
            Err(Error::DivergentTail { .. })
        ));
    }

    #[test]
    fn band_shell_ranges_are_exact() {
        // b = sqrt(2) rounded: its exact square is just above 2, so k = 2 is in
        let band = Band::new(0.0, 2f64.sqrt()).unwrap();
        assert_eq!(band.shell_range().unwrap(), (1, 2));
        // integer edges: strict below, inclusive above
        let band = Band::new(1.0, 3.0).unwrap();
        assert_eq!(band.shell_range().unwrap(), (2, 9));
        let tail = Band::tail(5.0).unwrap();
        assert!(tail.shell_range().is_err());
    }
}
