//! Distribution quantiles and CDFs: standard normal and chi-square.
//!
//! The normal quantile is Wichura's AS 241 rational approximation; the
//! chi-square quantile inverts a series/continued-fraction evaluation of the
//! regularized incomplete gamma function with the bracketed root finder.

use super::{find_root_bracketed, NumericsError, ToleranceConfig};
use crate::real::Real;

/// Distributions supported by [`quantile`] and [`cdf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    StandardNormal,
    ChiSquare { df: u32 },
}

/// Returns `x` with `CDF(x) = p`.
pub fn quantile<R: Real>(dist: Distribution, p: R) -> Result<R, NumericsError> {
    if !(p > R::zero() && p < R::one()) {
        return Err(NumericsError::DomainError {
            what: "p",
            value: p.to_f64().unwrap_or(f64::NAN),
            domain: "(0, 1)",
        });
    }
    match dist {
        Distribution::StandardNormal => Ok(normal_quantile(p)),
        Distribution::ChiSquare { df } => chi_square_quantile(df, p),
    }
}

/// Cumulative distribution function of `dist` at `x`.
pub fn cdf<R: Real>(dist: Distribution, x: R) -> Result<R, NumericsError> {
    match dist {
        Distribution::StandardNormal => Ok(normal_cdf(x)),
        Distribution::ChiSquare { df } => {
            check_df(df)?;
            if x <= R::zero() {
                return Ok(R::zero());
            }
            let a = R::from_u32(df).unwrap() / R::lit(2.0);
            Ok(reg_lower_gamma(a, x / R::lit(2.0)))
        }
    }
}

fn check_df(df: u32) -> Result<(), NumericsError> {
    if df == 0 {
        return Err(NumericsError::DomainError {
            what: "df",
            value: 0.0,
            domain: "df >= 1",
        });
    }
    Ok(())
}

fn normal_cdf<R: Real>(x: R) -> R {
    let half = R::lit(0.5);
    let p = reg_lower_gamma(half, x * x * half);
    if x >= R::zero() {
        half * (R::one() + p)
    } else {
        half * (R::one() - p)
    }
}

/// AS 241 (PPND16) rational approximation to the standard normal quantile.
fn normal_quantile<R: Real>(p: R) -> R {
    const A: [f64; 8] = [
        3.387_132_872_796_366_5e0,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946_1e4,
        4.592_195_393_154_987e4,
        6.726_577_092_700_870_4e4,
        3.343_057_558_358_813e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_545_5e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5e0,
        4.630_337_846_156_545e0,
        5.769_497_221_460_691e0,
        3.647_848_324_763_204_5e0,
        1.270_458_252_452_368_4e0,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759e0,
        1.676_384_830_183_803_8e0,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103e0,
        5.463_784_911_164_114e0,
        1.784_826_539_917_291_3e0,
        2.965_605_718_285_048_9e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_88e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_7e-15,
    ];

    fn ratio<R: Real>(num: &[f64; 8], den: &[f64; 8], r: R) -> R {
        let horner = |c: &[f64; 8]| {
            c.iter()
                .rev()
                .fold(R::zero(), |acc, &ck| acc * r + R::lit(ck))
        };
        horner(num) / horner(den)
    }

    let half = R::lit(0.5);
    let q = p - half;
    if q.abs() <= R::lit(0.425) {
        let r = R::lit(0.180_625) - q * q;
        return q * ratio(&A, &B, r);
    }
    let tail = if q < R::zero() { p } else { R::one() - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= R::lit(5.0) {
        r = r - R::lit(1.6);
        ratio(&C, &D, r)
    } else {
        r = r - R::lit(5.0);
        ratio(&E, &F, r)
    };
    if q < R::zero() {
        -x
    } else {
        x
    }
}

fn chi_square_quantile<R: Real>(df: u32, p: R) -> Result<R, NumericsError> {
    check_df(df)?;
    let dff = R::from_u32(df).unwrap();
    let two = R::lit(2.0);
    let a = dff / two;

    // Expand the upper bracket until it covers the target probability.
    let mut hi = dff + R::lit(10.0) * (two * dff).sqrt() + R::lit(10.0);
    let mut guard = 0;
    while reg_lower_gamma(a, hi / two) < p {
        hi = hi * two;
        guard += 1;
        if guard > 200 {
            return Err(NumericsError::MaxIterationsExceeded { limit: 200 });
        }
    }
    let root_tol = (R::epsilon() * hi * R::lit(8.0)).max(R::lit(1e-13));
    let tol = ToleranceConfig {
        root_abs_tol: root_tol,
        quad_abs_tol: R::lit(1e-12),
        max_iterations: 400,
    };
    find_root_bracketed(|x| reg_lower_gamma(a, x / two) - p, R::zero(), hi, &tol)
}

/// Regularized lower incomplete gamma P(a, x), for a >= 1/2, x >= 0.
fn reg_lower_gamma<R: Real>(a: R, x: R) -> R {
    if x <= R::zero() {
        return R::zero();
    }
    if x < a + R::one() {
        // Series expansion.
        let mut term = R::one() / a;
        let mut sum = term;
        let mut k = R::one();
        for _ in 0..500 {
            term = term * x / (a + k);
            sum += term;
            if term.abs() < sum.abs() * R::epsilon() {
                break;
            }
            k += R::one();
        }
        (sum.ln() + a * x.ln() - x - ln_gamma(a)).exp()
    } else {
        // Lentz continued fraction for the upper tail Q(a, x).
        let tiny = R::min_positive_value() / R::epsilon();
        let mut b = x + R::one() - a;
        let mut c = R::one() / tiny;
        let mut d = R::one() / b;
        let mut h = d;
        for i in 1..500 {
            let an = -R::from_count(i) * (R::from_count(i) - a);
            b += R::lit(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = R::one() / d;
            let del = d * c;
            h = h * del;
            if (del - R::one()).abs() < R::epsilon() {
                break;
            }
        }
        let q = (a * x.ln() - x - ln_gamma(a)).exp() * h;
        R::one() - q
    }
}

/// Lanczos approximation (g = 7, n = 9) to ln Γ(x), x > 0.
fn ln_gamma<R: Real>(x: R) -> R {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let g = R::lit(7.0);
    let half = R::lit(0.5);
    let z = x - R::one();
    let mut acc = R::lit(0.999_999_999_999_809_9);
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += R::lit(c) / (z + R::from_count(i + 1));
    }
    let t = z + g + half;
    let tau = R::TAU();
    half * tau.ln() + (z + half) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_examples() {
        assert_eq!(quantile(Distribution::StandardNormal, 0.5).unwrap(), 0.0);
        // Oracle: inverse-erf series / scipy.stats.norm.ppf(0.975).
        let z: f64 = quantile(Distribution::StandardNormal, 0.975).unwrap();
        assert!((z - 1.959_963_984_540_054).abs() < 1e-9);
        let z99: f64 = quantile(Distribution::StandardNormal, 0.995).unwrap();
        assert!((z99 - 2.575_829_303_548_901).abs() < 1e-8);
    }

    #[test]
    fn chi_square_quantile_closed_form_df2() {
        // For df = 2 the quantile is -2 ln(1 - p).
        let q: f64 = quantile(Distribution::ChiSquare { df: 2 }, 0.95).unwrap();
        assert!((q - 5.991_464_547_107_979).abs() < 1e-8);
        let q90: f64 = quantile(Distribution::ChiSquare { df: 2 }, 0.9).unwrap();
        assert!((q90 - (-2.0 * 0.1f64.ln())).abs() < 1e-8);
    }

    #[test]
    fn chi_square_round_trip() {
        for &df in &[1u32, 2, 4] {
            for &x in &[1.0f64, 5.0, 10.0] {
                let p = cdf(Distribution::ChiSquare { df }, x).unwrap();
                let back: f64 = quantile(Distribution::ChiSquare { df }, p).unwrap();
                assert!(
                    (back - x).abs() < 1e-6,
                    "round trip failed: df={df} x={x} -> p={p} -> {back}"
                );
            }
        }
    }

    #[test]
    fn normal_cdf_round_trip() {
        for &p in &[0.01f64, 0.2, 0.5, 0.83, 0.999] {
            let x = quantile(Distribution::StandardNormal, p).unwrap();
            let back = cdf(Distribution::StandardNormal, x).unwrap();
            assert!((back - p).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range_probability() {
        assert!(quantile::<f64>(Distribution::StandardNormal, 0.0).is_err());
        assert!(quantile::<f64>(Distribution::StandardNormal, 1.0).is_err());
        assert!(quantile::<f64>(Distribution::ChiSquare { df: 0 }, 0.5).is_err());
    }

    #[test]
    fn f32_quantiles_are_usable() {
        let z: f32 = quantile(Distribution::StandardNormal, 0.975f32).unwrap();
        assert!((z - 1.959_964).abs() < 1e-4);
        let q: f32 = quantile(Distribution::ChiSquare { df: 2 }, 0.95f32).unwrap();
        assert!((q - 5.991_464_5).abs() < 1e-3);
    }
}
