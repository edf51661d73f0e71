//! Distribution of polynomial values over prime fields, projected to the torus.
//!
//! Given a system `G = (G_1, ..., G_n)` of polynomials in `m` variables over
//! `F_p`, the points `(G_1(x)/p, ..., G_n(x)/p)` for `x` in `F_p^m` form a
//! multiset on the torus `T^n`. This crate computes, exactly where possible:
//!
//! * complete exponential (Weyl) sums `S_G(v)` and their full spectrum over
//!   the representatives `v` in `[0,p)^n`, directly and through a
//!   histogram-plus-DFT fast path ([`weyl`]);
//! * the projected point cloud, geodesic ball counts, and integrals against
//!   the normalized counting measure ([`torus`]);
//! * Fourier coefficients of ball indicators and of their smoothed
//!   (convolved) companions, with Bessel-function evaluators and truncated
//!   spectral expansions carrying rigorous tail bounds ([`kernels`]);
//! * lattice shell counts and band zeta sums with explicit tail constants
//!   ([`lattice`]);
//! * ball discrepancy, shrinking-target ratios, variance by direct counting
//!   and by Parseval expansion, and log-log scaling fits ([`analysis`]).
//!
//! All computations are deterministic: parallel reductions use fixed chunk
//! orders, and any randomness (center sampling) is driven by explicit seeds.

pub mod analysis;
mod dft;
pub mod ffpoly;
pub mod kernels;
pub mod lattice;
pub mod torus;
pub mod weyl;

pub use ffpoly::{builtin_system, enumerate_domain, PolynomialSystem, PrimeModulus};
pub use torus::{BallSpec, TorusCloud, TorusPoint};
pub use weyl::{EtaValue, WeylSpectrum};

/// Default cap on in-memory tables (histograms, spectra), in entries.
pub const DEFAULT_TABLE_CAP: u64 = 1 << 26;

/// Errors shared by all modules of this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("domain F_p^m too large: p = {p}, m = {m} does not fit a 64-bit count")]
    DomainTooLarge { p: u64, m: usize },
    #[error("coordinate {index} out of range: {value} not in [0, {p})")]
    CoordinateOutOfRange { index: usize, value: u64, p: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown builtin system `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid builtin parameters: {0}")]
    InvalidBuiltin(String),
    #[error("required table of {required} entries exceeds the budget of {budget}")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("tail bound {bound:.3e} exceeds the requested tolerance {tol:.3e}; raise the cutoff")]
    TailTooLarge { bound: f64, tol: f64 },
    #[error("tail diverges: s = {s} must exceed the dimension n = {n}")]
    DivergentTail { n: usize, s: f64 },
    #[error("malformed cache blob: {0}")]
    MalformedCache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
