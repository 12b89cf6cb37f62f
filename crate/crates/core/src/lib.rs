//! Stationary Markov chains generated by orthonormal-series perturbations of
//! the independence copula, and estimators for their coefficients.
//!
//! Three copula families are first-class: the sine family (half-cosine
//! basis), the sine-cosine family (full trigonometric basis) and the
//! Legendre family extending Farlie–Gumbel–Morgenstern. For each the crate
//! provides:
//!
//! * chain simulation by conditional-CDF inversion ([`chain`]),
//! * the moment-like estimator with closed-form asymptotic covariance,
//!   confidence intervals/regions and a χ² independence test ([`moment`]),
//! * constrained maximum likelihood with observed-information intervals
//!   ([`mle`]),
//! * the kernel-smoothed robust estimator in both bandwidth variants
//!   ([`robust`]),
//! * a coverage-experiment runner and the associated file formats
//!   ([`experiment`], [`io`]).
//!
//! Numeric kernels are generic over the scalar type via [`Real`]; the
//! aliases below fix `f64`, which the estimator pipelines and the CLI use.

pub mod basis;
pub mod chain;
pub mod copula;
pub mod experiment;
pub mod io;
pub mod mle;
pub mod moment;
pub mod numerics;
pub mod real;
pub mod robust;

pub use real::Real;

/// Default-precision tolerance bundle.
pub type Tolerances = numerics::ToleranceConfig<f64>;
/// Default-precision copula spec.
pub type Spec = copula::CopulaSpec<f64>;
/// Default-precision realized chain.
pub type Chain = chain::ChainSample<f64>;
/// Default-precision covariance/information matrix.
pub type Sigma = moment::SigmaMatrix<f64>;
/// Default-precision estimate report.
pub type Report = moment::EstimateReport<f64>;
/// Default-precision basis moment cache.
pub type Moments = basis::MomentCache<f64>;
