//! Shared numerical kernels: bracketed root finding, adaptive quadrature on
//! the unit interval, and distribution quantiles.
//!
//! All routines are pure functions and safe to call concurrently.

mod quad;
mod root;
mod special;

pub use quad::integrate_01;
pub use root::find_root_bracketed;
pub use special::{cdf, quantile, Distribution};

use thiserror::Error;

use crate::real::Real;

/// Errors from the numerical kernels. Diagnostic values are reported as
/// `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    /// The bracket endpoints do not straddle a root.
    #[error("no sign change over [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// The iteration budget ran out before the tolerance was met.
    #[error("exceeded {limit} iterations without meeting the tolerance")]
    MaxIterationsExceeded { limit: usize },
    /// An argument lies outside the mathematical domain of the routine.
    #[error("{what} = {value} is outside {domain}")]
    DomainError {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    /// A tolerance configuration violates its invariants.
    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(&'static str),
}

/// Tolerances shared by the root finder and the quadrature routine.
///
/// Defaults target `f64`: absolute root tolerance `1e-10`, absolute
/// quadrature tolerance `1e-12`, at most 200 iterations (bracket shrinks or
/// panel splits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig<R> {
    pub root_abs_tol: R,
    pub quad_abs_tol: R,
    pub max_iterations: usize,
}

impl<R: Real> Default for ToleranceConfig<R> {
    fn default() -> Self {
        Self {
            root_abs_tol: R::lit(1e-10),
            quad_abs_tol: R::lit(1e-12),
            max_iterations: 200,
        }
    }
}

impl<R: Real> ToleranceConfig<R> {
    /// Builds a configuration, enforcing strictly positive tolerances and a
    /// nonzero iteration budget.
    pub fn new(
        root_abs_tol: R,
        quad_abs_tol: R,
        max_iterations: usize,
    ) -> Result<Self, NumericsError> {
        if !(root_abs_tol > R::zero()) || !root_abs_tol.is_finite() {
            return Err(NumericsError::InvalidTolerance(
                "root_abs_tol must be strictly positive and finite",
            ));
        }
        if !(quad_abs_tol > R::zero()) || !quad_abs_tol.is_finite() {
            return Err(NumericsError::InvalidTolerance(
                "quad_abs_tol must be strictly positive and finite",
            ));
        }
        if max_iterations == 0 {
            return Err(NumericsError::InvalidTolerance(
                "max_iterations must be at least 1",
            ));
        }
        Ok(Self {
            root_abs_tol,
            quad_abs_tol,
            max_iterations,
        })
    }
}
