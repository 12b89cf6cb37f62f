//! Kernel-smoothed robust estimation of the copula coefficients.
//!
//! The transformed series Y_ki = φ_k(U_i) φ_k(U_{i−1}) has mean λ_k; the
//! estimator Gaussian-kernel-weights each Y_i by an independent standard
//! normal draw X_i, raw = (1/(n h)) Σ Y_i exp(−X_i²/(2h²)), and corrects the
//! kernel bias by the factor √(1+h²). Two bandwidth rules are supported:
//! one from the sample moments of Y, one from the family's closed-form
//! second moments evaluated at plug-in estimates.

use thiserror::Error;

use crate::basis::BasisFunctionId;
use crate::copula::{CopulaSpec, Family};
use crate::numerics::{quantile, Distribution, NumericsError};
use crate::real::Real;

/// Default guard below which the mean of Y is treated as numerically zero
/// and the bandwidth formula refuses to divide by it.
pub const DEGENERATE_MEAN_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobustError {
    #[error("chain has no transitions (need at least two values)")]
    EmptyChain,
    #[error("series mean {mean} is numerically indistinguishable from 0; the bandwidth formula diverges")]
    DegenerateMean { mean: f64 },
    #[error("series has {y_len} entries but the noise sample has {noise_len}")]
    LengthMismatch { y_len: usize, noise_len: usize },
    #[error("plug-in estimates are not in the interior of the family region")]
    NonInteriorSpec,
    #[error("bandwidth must be strictly positive, got {0}")]
    BadBandwidth(f64),
    #[error("parameter index {k} is outside 1..={max} for this family")]
    UnsupportedIndex { k: usize, max: usize },
    #[error("significance level {0} must lie in (0, 1)")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which bandwidth rule produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthVariant {
    /// h_n from the sample moments of Y.
    Empirical,
    /// ĥ_{n,k} from the family's closed-form moments at plug-in estimates.
    Model,
}

/// A kernel estimate with its bias correction and confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEstimate<R> {
    pub raw: R,
    pub bandwidth: R,
    /// raw · √(1 + bandwidth²), exactly.
    pub corrected: R,
    pub interval: (R, R),
    pub variant: BandwidthVariant,
}

/// Y_i = φ_k(U_i) φ_k(U_{i−1}), i = 1..n.
pub fn transform_series<R: Real>(
    values: &[R],
    id: BasisFunctionId,
) -> Result<Vec<R>, RobustError> {
    if values.len() < 2 {
        return Err(RobustError::EmptyChain);
    }
    Ok(values
        .windows(2)
        .map(|w| id.eval(w[0]) * id.eval(w[1]))
        .collect())
}

/// h_n = [ mean(Y²) / (mean(Y)² · n · √2) ]^{1/5} with the default
/// degenerate-mean guard.
pub fn empirical_bandwidth<R: Real>(y: &[R]) -> Result<R, RobustError> {
    empirical_bandwidth_with_guard(y, R::lit(DEGENERATE_MEAN_GUARD))
}

/// Same as [`empirical_bandwidth`] with a caller-chosen guard threshold.
pub fn empirical_bandwidth_with_guard<R: Real>(y: &[R], guard: R) -> Result<R, RobustError> {
    if y.is_empty() {
        return Err(RobustError::EmptyChain);
    }
    let n = R::from_count(y.len());
    let mean = y.iter().copied().sum::<R>() / n;
    if mean.abs() < guard {
        return Err(RobustError::DegenerateMean {
            mean: mean.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mean_sq = y.iter().map(|&v| v * v).sum::<R>() / n;
    Ok((mean_sq / (mean * mean * n * R::SQRT_2())).powf(R::lit(0.2)))
}

/// Closed-form Ê[Y²_k] for the family at plug-in estimates: the second
/// moment of the transformed series under the fitted model.
pub fn model_second_moment<R: Real>(
    family: Family,
    k: usize,
    lambda_hat: &[R],
) -> Result<R, RobustError> {
    let s = family.param_count();
    if k == 0 || k > s {
        return Err(RobustError::UnsupportedIndex { k, max: s });
    }
    let one = R::one();
    let half = R::lit(0.5);
    Ok(match family {
        // Cosine-indexed components see 1 + λ̂₂/2 at k = 1 and 1 at k = 2;
        // the sine-indexed components of the full basis behave the same.
        Family::Sine => match k {
            1 => one + lambda_hat[1] * half,
            _ => one,
        },
        Family::SineCosine => match k {
            1 | 3 => one + lambda_hat[1] * half,
            _ => one,
        },
        Family::Legendre => match k {
            1 => one + R::lit(0.8) * lambda_hat[1],
            _ => one + R::lit(20.0 / 49.0) * lambda_hat[1],
        },
    })
}

/// ĥ_{n,k} = [ Ê[Y²_k] / (λ̂_k² · n · √2) ]^{1/5}.
pub fn model_bandwidth<R: Real>(
    family: Family,
    k: usize,
    lambda_hat: &[R],
    n: usize,
) -> Result<R, RobustError> {
    let spec = CopulaSpec::new(family, lambda_hat.to_vec())
        .map_err(|_| RobustError::UnsupportedIndex { k, max: family.param_count() })?;
    if !spec.validate().is_interior() {
        return Err(RobustError::NonInteriorSpec);
    }
    let anchor = lambda_hat[k - 1];
    if anchor.abs() < R::lit(DEGENERATE_MEAN_GUARD) {
        return Err(RobustError::DegenerateMean {
            mean: anchor.to_f64().unwrap_or(f64::NAN),
        });
    }
    let msq = model_second_moment(family, k, lambda_hat)?;
    Ok((msq / (anchor * anchor * R::from_count(n) * R::SQRT_2())).powf(R::lit(0.2)))
}

/// The kernel estimate with bias correction and (1−α) confidence interval.
///
/// `second_moment` is mean(Y²) for the empirical variant and Ê[Y²_k] for
/// the model variant; the interval is centered on the corrected point with
/// half-width z_{α/2} √(second_moment / (n h √2)).
pub fn robust_estimate<R: Real>(
    y: &[R],
    h: R,
    noise: &[R],
    second_moment: R,
    variant: BandwidthVariant,
    alpha: R,
) -> Result<KernelEstimate<R>, RobustError> {
    if y.is_empty() {
        return Err(RobustError::EmptyChain);
    }
    if y.len() != noise.len() {
        return Err(RobustError::LengthMismatch {
            y_len: y.len(),
            noise_len: noise.len(),
        });
    }
    if !(h > R::zero()) || !h.is_finite() {
        return Err(RobustError::BadBandwidth(h.to_f64().unwrap_or(f64::NAN)));
    }
    if !(alpha > R::zero() && alpha < R::one()) {
        return Err(RobustError::InvalidAlpha(alpha.to_f64().unwrap_or(f64::NAN)));
    }
    let n = R::from_count(y.len());
    let half = R::lit(0.5);
    let weighted: R = y
        .iter()
        .zip(noise)
        .map(|(&yi, &xi)| {
            let z = xi / h;
            yi * (-half * z * z).exp()
        })
        .sum();
    let raw = weighted / (n * h);
    let corrected = raw * (R::one() + h * h).sqrt();
    let z = quantile(Distribution::StandardNormal, R::one() - alpha / R::lit(2.0))?;
    let half_width = z * (second_moment / (n * h * R::SQRT_2())).sqrt();
    Ok(KernelEstimate {
        raw,
        bandwidth: h,
        corrected,
        interval: (corrected - half_width, corrected + half_width),
        variant,
    })
}
