//! Ball indicators on the torus, their smoothed (convolved) companions, and
//! both families' Fourier coefficients.
//!
//! The indicator `K_R(., y)` of the geodesic ball has Fourier coefficients
//!
//! ```text
//! K^(0)   = vol(B_R)
//! K^(v)   = R^(n/2) J_{n/2}(2 pi R |v|) |v|^(-n/2) e(-v.y)      (v != 0)
//! ```
//!
//! which decay too slowly for an absolutely convergent series. The smoothed
//! kernels normalize the convolution of two ball indicators,
//! `k(+/-) = vol(B_rho)^(-1) k_{R +/- rho} * k_rho`, squeezing the sharp
//! indicator pointwise from both sides while their coefficients pick up a
//! second Bessel factor and decay like `|v|^(-(n+1))`:
//!
//! ```text
//! K(+/-)^(v) = (R +/- rho)^(n/2) rho^(n/2) / vol(B_rho)
//!              * J_{n/2}(2 pi (R +/- rho)|v|) J_{n/2}(2 pi rho |v|)
//!              * |v|^(-n) e(-v.y)
//! ```
//!
//! Pointwise values of the smoothed kernels are the exact normalized
//! intersection volume of two balls, evaluated in closed form from
//! hyperspherical caps (regularized incomplete beta); this reproduces the
//! plateau and support rules exactly.

mod special;

pub use special::{bessel_j, gamma, ln_gamma, reg_inc_beta};

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::lattice;
use crate::torus::{ball_volume, dist_coords};
use crate::weyl::WeylSpectrum;
use crate::{Error, Result};

/// Envelope constant in `|J_nu(x)| <= AMPLITUDE_BOUND * x^(-1/2)`, valid for
/// all `x > 0` and the orders `nu = n/2 <= 3` used here. A dense scan gives
/// `sup sqrt(x) |J_nu(x)| <= 0.903` for these orders (the supremum sits at
/// the first oscillation; the asymptotic amplitude is sqrt(2/pi) = 0.798),
/// so 1.0 carries a 10% safety margin. Verified by test.
pub const BESSEL_AMPLITUDE_BOUND: f64 = 1.0;

/// Largest torus dimension for which the amplitude bound above is verified.
const MAX_KERNEL_DIM: usize = 6;

/// Which side of the sharp indicator a smoothed kernel approximates from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSign {
    Plus,
    Minus,
}

impl KernelSign {
    /// The outer radius `R + rho` or `R - rho`.
    pub fn outer_radius(self, r: f64, rho: f64) -> f64 {
        match self {
            KernelSign::Plus => r + rho,
            KernelSign::Minus => r - rho,
        }
    }
}

/// Radii of a smoothed kernel: `0 < rho <= R/2` and `R + 2 rho < 1/2` so the
/// support of the plus kernel stays inside the injectivity radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    r: f64,
    rho: f64,
}

impl SmoothingParams {
    pub fn new(r: f64, rho: f64) -> Result<Self> {
        if !(r > 0.0 && rho > 0.0 && rho <= r / 2.0) {
            return Err(Error::InvalidArgument(format!(
                "smoothing requires 0 < rho <= R/2, got R = {}, rho = {}",
                r, rho
            )));
        }
        if r + 2.0 * rho >= 0.5 {
            return Err(Error::InvalidArgument(format!(
                "R + 2 rho = {} must stay below 1/2",
                r + 2.0 * rho
            )));
        }
        Ok(SmoothingParams { r, rho })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// The optimized smoothing radius `rho = R^(-(n-1)/(n+1)) p^(-2 eta_eff /(n+1))`,
/// clamped into `(0, R/2]` and to the torus constraint `R + 2 rho < 1/2`.
pub fn default_smoothing(n: usize, r: f64, p: u64, eta_eff: f64) -> Result<SmoothingParams> {
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "radius {} not in (0, 1/2)",
            r
        )));
    }
    let nf = n as f64;
    let formula = r.powf(-(nf - 1.0) / (nf + 1.0)) * (p as f64).powf(-2.0 * eta_eff / (nf + 1.0));
    let torus_cap = 0.5 * (0.5 - r) * (1.0 - 1e-9);
    let rho = formula.min(r / 2.0).min(torus_cap);
    SmoothingParams::new(r, rho)
}

/// Kernel selector for coefficient evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Sharp,
    Smoothed(KernelSign),
}

/// Closed-form evaluator for the Fourier coefficients of one kernel.
#[derive(Debug, Clone)]
pub struct KernelCoefficients {
    kind: KernelKind,
    n: usize,
    r: f64,
    rho: f64,
}

impl KernelCoefficients {
    pub fn sharp(n: usize, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "radius {} not in (0, 1/2)",
                r
            )));
        }
        check_dim(n)?;
        Ok(KernelCoefficients {
            kind: KernelKind::Sharp,
            n,
            r,
            rho: 0.0,
        })
    }

    pub fn smoothed(n: usize, params: SmoothingParams, sign: KernelSign) -> Result<Self> {
        check_dim(n)?;
        Ok(KernelCoefficients {
            kind: KernelKind::Smoothed(sign),
            n,
            r: params.radius(),
            rho: params.rho(),
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The coefficient at `v = 0`: the volume of the (outer) ball.
    pub fn zero_coefficient(&self) -> f64 {
        match self.kind {
            KernelKind::Sharp => ball_volume(self.n, self.r),
            KernelKind::Smoothed(sign) => {
                ball_volume(self.n, sign.outer_radius(self.r, self.rho))
            }
        }
    }

    /// Coefficient magnitude at `|v| = norm` (phase stripped), `norm > 0`.
    pub fn magnitude(&self, norm: f64) -> f64 {
        debug_assert!(norm > 0.0);
        let half = self.n as f64 / 2.0;
        match self.kind {
            KernelKind::Sharp => {
                self.r.powf(half) * bessel_j(half, 2.0 * PI * self.r * norm).expect("valid order")
                    / norm.powf(half)
            }
            KernelKind::Smoothed(sign) => {
                let outer = sign.outer_radius(self.r, self.rho);
                outer.powf(half) * self.rho.powf(half) / ball_volume(self.n, self.rho)
                    * bessel_j(half, 2.0 * PI * outer * norm).expect("valid order")
                    * bessel_j(half, 2.0 * PI * self.rho * norm).expect("valid order")
                    / norm.powf(self.n as f64)
            }
        }
    }

    /// Full coefficient at integer frequency `v` and center `y`.
    pub fn eval(&self, v: &[i64], y: &[f64]) -> Complex64 {
        debug_assert_eq!(v.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        let norm_sq: i64 = v.iter().map(|&c| c * c).sum();
        if norm_sq == 0 {
            return Complex64::new(self.zero_coefficient(), 0.0);
        }
        let norm = (norm_sq as f64).sqrt();
        let dot: f64 = v.iter().zip(y).map(|(&vi, &yi)| vi as f64 * yi).sum();
        let phase = -2.0 * PI * dot;
        self.magnitude(norm) * Complex64::new(phase.cos(), phase.sin())
    }

    /// Explicit constant `C` with `|coefficient(v)| <= C |v|^(-(n+1))` for
    /// smoothed kernels, from the Bessel amplitude envelope applied to both
    /// factors.
    pub fn decay_constant(&self) -> Result<f64> {
        match self.kind {
            KernelKind::Sharp => Err(Error::InvalidArgument(
                "the sharp kernel has no absolutely convergent expansion".into(),
            )),
            KernelKind::Smoothed(sign) => {
                let outer = sign.outer_radius(self.r, self.rho);
                let half = (self.n as f64 - 1.0) / 2.0;
                Ok(BESSEL_AMPLITUDE_BOUND * BESSEL_AMPLITUDE_BOUND / (2.0 * PI)
                    * outer.powf(half)
                    * self.rho.powf(half)
                    / ball_volume(self.n, self.rho))
            }
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_KERNEL_DIM {
        return Err(Error::InvalidArgument(format!(
            "kernel dimension {} outside supported range 1..={}",
            n, MAX_KERNEL_DIM
        )));
    }
    Ok(())
}

/// `K_R^(v, y)` for the sharp ball indicator.
pub fn khat_ball(n: usize, r: f64, v: &[i64], y: &[f64]) -> Result<Complex64> {
    Ok(KernelCoefficients::sharp(n, r)?.eval(v, y))
}

/// `K(+/-)^(v, y)` for a smoothed kernel.
pub fn khat_smoothed(
    n: usize,
    params: SmoothingParams,
    sign: KernelSign,
    v: &[i64],
    y: &[f64],
) -> Result<Complex64> {
    Ok(KernelCoefficients::smoothed(n, params, sign)?.eval(v, y))
}

// ---------------------------------------------------------------------------
// Pointwise kernels
// ---------------------------------------------------------------------------

/// Sharp ball indicator: 1 iff the wraparound distance is at most `r`.
pub fn kernel_ball_pointwise(x: &[f64], y: &[f64], r: f64) -> f64 {
    debug_assert!(r < 0.5);
    if dist_coords(x, y) <= r {
        1.0
    } else {
        0.0
    }
}

/// Smoothed kernel value `vol(B_rho)^(-1) vol(B_{R +/- rho}(x) ^ B_rho(y))`.
///
/// With `R + 2 rho < 1/2` at most one periodic translate contributes, so the
/// Euclidean two-ball intersection against the wraparound distance is exact.
pub fn kernel_smoothed_pointwise(
    x: &[f64],
    y: &[f64],
    params: SmoothingParams,
    sign: KernelSign,
) -> f64 {
    let d = dist_coords(x, y);
    let n = x.len();
    let outer = sign.outer_radius(params.radius(), params.rho());
    let v = ball_intersection_volume(n, outer, params.rho(), d) / ball_volume(n, params.rho());
    v.clamp(0.0, 1.0)
}

/// Volume of the cap of the n-ball of radius `r` cut off by a plane at
/// signed distance `c` from the center (the cap on the far side of the
/// plane; `c < 0` gives the major cap).
pub fn cap_volume(n: usize, r: f64, c: f64) -> f64 {
    debug_assert!(r > 0.0);
    if c >= r {
        return 0.0;
    }
    if c <= -r {
        return ball_volume(n, r);
    }
    if c >= 0.0 {
        let x = 1.0 - (c / r) * (c / r);
        0.5 * ball_volume(n, r)
            * reg_inc_beta((n as f64 + 1.0) / 2.0, 0.5, x).expect("valid parameters")
    } else {
        ball_volume(n, r) - cap_volume(n, r, -c)
    }
}

/// Exact intersection volume of two n-balls with center distance `d`.
pub fn ball_intersection_volume(n: usize, r1: f64, r2: f64, d: f64) -> f64 {
    debug_assert!(r1 > 0.0 && r2 > 0.0 && d >= 0.0);
    if d >= r1 + r2 {
        return 0.0;
    }
    let (small, large) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    if d + small <= large {
        return ball_volume(n, small);
    }
    // the separating hyperplane sits at distance c1 from center 1
    let c1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let c2 = d - c1;
    cap_volume(n, r1, c1) + cap_volume(n, r2, c2)
}

// ---------------------------------------------------------------------------
// Truncated spectral expansion
// ---------------------------------------------------------------------------

/// A truncated expansion value together with a rigorous bound on the
/// discarded tail.
#[derive(Debug, Clone, Copy)]
pub struct SpectralIntegral {
    pub value: f64,
    pub tail_bound: f64,
    pub cutoff: u64,
    /// Imaginary residue of the (mathematically real) sum; a few ulps of
    /// floating-point noise in practice.
    pub imag_residual: f64,
}

/// Evaluate `integral of K(+/-)(., y) d mu_G` through the spectral expansion
/// `K^(0) + (1/p^m) sum_(0 < |v| <= V) K^(v, y) S_G(v)`.
///
/// The returned tail bound covers everything beyond the cutoff:
/// frequencies off `p Z^n` are bounded by the measured maximal nontrivial
/// `|S|/p^m` times the lattice tail of `|v|^(-(n+1))`, frequencies on
/// `p Z^n` by the trivial `|S| <= p^m` on their own sparse sublattice.
pub fn spectral_integral(
    spectrum: &WeylSpectrum,
    coeffs: &KernelCoefficients,
    y: &[f64],
    cutoff: u64,
    tail_tolerance: Option<f64>,
) -> Result<SpectralIntegral> {
    let n = spectrum.n();
    if coeffs.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: coeffs.n(),
        });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    let decay = coeffs.decay_constant()?; // also rejects the sharp kernel

    let pm = spectrum.domain_size();
    let p = spectrum.p() as i64;
    let mut acc = Complex64::new(coeffs.zero_coefficient(), 0.0);
    let mut rep = vec![0u64; n];
    lattice::for_each_point(n, 1, cutoff * cutoff, |v, _| {
        for (r, &vi) in rep.iter_mut().zip(v) {
            *r = vi.rem_euclid(p) as u64;
        }
        let s = spectrum.value_at_rep(&rep);
        if s.norm_sqr() != 0.0 {
            acc += coeffs.eval(v, y) * (s / pm);
        }
    });

    let tail_bound = decay * spectral_tail_zeta(spectrum, cutoff, 1.0)?;
    if let Some(tol) = tail_tolerance {
        if tail_bound > tol {
            return Err(Error::TailTooLarge {
                bound: tail_bound,
                tol,
            });
        }
    }
    Ok(SpectralIntegral {
        value: acc.re,
        tail_bound,
        cutoff,
        imag_residual: acc.im.abs(),
    })
}

/// Bound for `sum_(|v| > V) (|S(v)|/p^m)^weight |v|^(-(n+1))`, splitting off
/// the sparse sublattice `p Z^n` where the trivial bound 1 is the only one
/// available.
pub(crate) fn spectral_tail_zeta(
    spectrum: &WeylSpectrum,
    cutoff: u64,
    weight: f64,
) -> Result<f64> {
    let n = spectrum.n();
    let s = n as f64 + 1.0;
    let s_max = spectrum
        .max_nontrivial()
        .map(|(a, _)| a / spectrum.domain_size())
        .unwrap_or(0.0);
    let off_lattice = s_max.powf(weight) * lattice::tail_bound(n, cutoff as f64, s)?;
    let p = spectrum.p() as f64;
    let v_over_p = cutoff as f64 / p;
    let on_lattice = p.powf(-s)
        * if v_over_p >= 1.0 {
            lattice::tail_bound(n, v_over_p, s)?
        } else {
            // all w != 0 qualify: shell |w|^2 = 1 exactly plus the tail from 1
            2.0 * n as f64 + lattice::tail_bound(n, 1.0, s)?
        };
    Ok(off_lattice + on_lattice)
}
