//! Gamma, Bessel `J`, and the regularized incomplete beta function.
//!
//! Orders and arguments here stay small (Bessel orders are `n/2` and
//! `n/2 +- 1` for torus dimensions up to 6), so simple evaluators reach the
//! contracted accuracy: Lanczos for Gamma (relative error well under 1e-12),
//! a compensated power series for `J` below `x = 15 + |nu|` and the Hankel
//! asymptotic expansion above, and a Lentz continued fraction for the
//! incomplete beta.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Lanczos coefficients for g = 10.900511 (11 terms). In exact arithmetic
/// this set is accurate to ~1e-18 relative on (0, 170]; in double it stays
/// comfortably below 1e-13.
const LANCZOS_G: f64 = 10.900511;
const LANCZOS: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut s = LANCZOS[0];
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (x - 1.0 + k as f64);
    }
    s
}

/// `Gamma(x)` for `x > 0`.
///
/// Integers and half-integers (everything the kernel formulas use) go
/// through the exact recursion from `Gamma(1) = 1` and
/// `Gamma(1/2) = sqrt(pi)`; other arguments use Lanczos.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma requires a positive argument, got {}",
            x
        )));
    }
    let doubled = 2.0 * x;
    if doubled.fract() == 0.0 && x <= 200.0 {
        let mut acc = 1.0f64;
        let mut t = x;
        while t > 1.0 {
            t -= 1.0;
            acc *= t;
        }
        // t is now exactly 1 or 1/2
        return Ok(if t == 1.0 { acc } else { acc * PI.sqrt() });
    }
    let t = (x - 0.5 + LANCZOS_G) / std::f64::consts::E;
    Ok(2.0 * (std::f64::consts::E / PI).sqrt() * t.powf(x - 0.5) * lanczos_sum(x))
}

/// `ln Gamma(x)` for `x > 0`, Lanczos in log form (used to seed Bessel
/// series at general orders without overflow).
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ln_gamma requires a positive argument, got {}",
            x
        )));
    }
    let t = x - 0.5 + LANCZOS_G;
    Ok(0.5 * (4.0 * std::f64::consts::E / PI).ln() + (x - 0.5) * (t.ln() - 1.0)
        + lanczos_sum(x).ln())
}

/// Crossover between the power series and the asymptotic expansion.
fn bessel_crossover(nu: f64) -> f64 {
    15.0 + nu.abs()
}

/// Bessel function of the first kind, `x >= 0`, `nu >= -1/2`.
///
/// Absolute error stays below 1e-10 on `[0, 1e4]` for the small orders used
/// here: the series loses at most ~5 digits to cancellation before the
/// crossover, and at `x >= 15` the asymptotic terms bottom out near 1e-13.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if nu < -0.5 || x < 0.0 || nu.is_nan() || x.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "bessel_j requires nu >= -1/2 and x >= 0, got nu = {}, x = {}",
            nu, x
        )));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    if x < bessel_crossover(nu) {
        Ok(bessel_series(nu, x))
    } else {
        Ok(bessel_asymptotic(nu, x))
    }
}

fn bessel_series(nu: f64, x: f64) -> f64 {
    let half = x / 2.0;
    // (x/2)^nu / Gamma(nu + 1) through logs; safe for every order.
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0).expect("nu + 1 > 0")).exp();
    let q = half * half;
    // Neumaier-compensated accumulation.
    let mut sum = term;
    let mut comp = 0.0f64;
    for k in 0..400 {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (nu + kf + 1.0));
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if term.abs() < 1e-18 * (1.0 + sum.abs()) {
            break;
        }
    }
    sum + comp
}

fn bessel_asymptotic(nu: f64, x: f64) -> f64 {
    // Hankel expansion: J_nu(x) ~ sqrt(2/(pi x)) (P cos chi - Q sin chi),
    // chi = x - (nu/2 + 1/4) pi, with a_k = prod (4nu^2 - (2j-1)^2)/(k! 8^k).
    // The series is asymptotic; terms are added while they keep shrinking.
    let mu = 4.0 * nu * nu;
    let chi = x - (0.5 * nu + 0.25) * PI;
    let mut p = 1.0f64;
    let mut q = 0.0f64;
    let mut a = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * x * kf);
        if a == 0.0 {
            break; // half-integer order: the expansion terminates exactly
        }
        if a.abs() >= prev {
            break; // divergence onset
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Regularized incomplete beta `I_x(a, b)` by the standard continued
/// fraction (modified Lentz), with the symmetry flip for fast convergence.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reg_inc_beta requires positive parameters, got a = {}, b = {}",
            a, b
        )));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let ln_front =
        ln_gamma(a + b)? - ln_gamma(a)? - ln_gamma(b)? + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(a, b, x) / a)
    } else {
        Ok(1.0 - front * beta_cf(b, a, 1.0 - x) / b)
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
