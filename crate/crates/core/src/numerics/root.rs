//! Bracketed root finding: bisection with secant acceleration.
//!
//! Bisection alone guarantees convergence on any sign-changing bracket; the
//! secant step is taken on alternate iterations and only when it lands
//! strictly inside the current bracket, so the bracket width at least halves
//! every two iterations.

use super::{NumericsError, ToleranceConfig};
use crate::real::Real;

/// Finds a root of `f` on `[lo, hi]`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs, or one endpoint to
/// already be a root (residual within `root_abs_tol`). Returns a point `x`
/// with bracket width at most `root_abs_tol`, chosen among the final bracket
/// endpoints and midpoint by smallest residual.
pub fn find_root_bracketed<R: Real>(
    f: impl Fn(R) -> R,
    lo: R,
    hi: R,
    tol: &ToleranceConfig<R>,
) -> Result<R, NumericsError> {
    if !(lo <= hi) {
        return Err(NumericsError::DomainError {
            what: "bracket",
            value: lo.to_f64().unwrap_or(f64::NAN),
            domain: "lo <= hi",
        });
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == R::zero() {
        return Ok(a);
    }
    if fb == R::zero() {
        return Ok(b);
    }
    if fa * fb > R::zero() {
        // Accept an endpoint whose residual is already below tolerance.
        if fa.abs() <= tol.root_abs_tol || fb.abs() <= tol.root_abs_tol {
            return Ok(if fa.abs() <= fb.abs() { a } else { b });
        }
        return Err(NumericsError::NoSignChange {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
            f_lo: fa.to_f64().unwrap_or(f64::NAN),
            f_hi: fb.to_f64().unwrap_or(f64::NAN),
        });
    }

    let two = R::lit(2.0);
    let mut converged = false;
    for iter in 0..tol.max_iterations {
        if b - a <= tol.root_abs_tol {
            converged = true;
            break;
        }
        let mid = (a + b) / two;
        let x = if iter % 2 == 0 {
            mid
        } else {
            let denom = fb - fa;
            let secant = b - fb * (b - a) / denom;
            if secant.is_finite() && secant > a && secant < b {
                secant
            } else {
                mid
            }
        };
        let fx = f(x);
        if fx == R::zero() {
            return Ok(x);
        }
        if fa * fx < R::zero() {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
    }
    if !converged && b - a > tol.root_abs_tol {
        return Err(NumericsError::MaxIterationsExceeded {
            limit: tol.max_iterations,
        });
    }

    let mid = (a + b) / two;
    let fm = f(mid);
    let mut best = (mid, fm.abs());
    if fa.abs() < best.1 {
        best = (a, fa.abs());
    }
    if fb.abs() < best.1 {
        best = (b, fb.abs());
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    /// Plain bisection, independent of the production path.
    fn bisect_oracle(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if b - a <= 1e-12 {
                return m;
            }
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn linear_root() {
        let x = find_root_bracketed(|x| x - 0.5, 0.0, 1.0, &tol()).unwrap();
        assert!((x - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn cubic_root_matches_bisection_oracle() {
        // Oracle value for x^3 - x + 0.25 on [0, 0.6], bisected to 1e-12.
        let frozen = 0.26959443640544467;
        let f = |x: f64| x * x * x - x + 0.25;
        let oracle = bisect_oracle(f, 0.0, 0.6);
        assert!((oracle - frozen).abs() <= 1e-11);
        let x = find_root_bracketed(f, 0.0, 0.6, &tol()).unwrap();
        assert!((x - frozen).abs() <= 1e-9);
    }

    #[test]
    fn endpoint_root() {
        let x = find_root_bracketed(|x| x - 1.0, 0.0, 1.0, &tol()).unwrap();
        assert_eq!(x, 1.0);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let err = find_root_bracketed(|x| x * x + 1.0, 0.0, 1.0, &tol()).unwrap_err();
        assert!(matches!(err, NumericsError::NoSignChange { .. }));
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let tight = ToleranceConfig::new(1e-14, 1e-12, 3).unwrap();
        let err = find_root_bracketed(|x| x - 0.123456789, 0.0, 1.0, &tight).unwrap_err();
        assert!(matches!(err, NumericsError::MaxIterationsExceeded { .. }));
    }

    #[test]
    fn residual_is_controlled_on_monotone_cdf_residuals() {
        // Residual family from conditional-CDF inversion: strictly
        // increasing, slope bounded by 2 on [0, 1].
        for &w in &[0.01, 0.3, 0.5, 0.77, 0.99] {
            let f = move |v: f64| v + 0.1 * (2.0 * std::f64::consts::PI * v).sin() - w;
            let x = find_root_bracketed(f, 0.0, 1.0, &tol()).unwrap();
            assert!(f(x).abs() <= 10.0 * 2.0 * 1e-10, "residual too large at w={w}");
        }
    }
}
