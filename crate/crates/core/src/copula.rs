//! Parameterized copulas from the three families: density, CDF, conditional
//! CDF, and parameter-region validation.
//!
//! Densities have the series form c(u,v) = 1 + Σ λ_k φ_k(u) φ_k(v) over the
//! family's basis; the CDF and conditional CDF are the term-wise
//! antiderivatives, implemented in closed form per family.

use std::fmt;

use thiserror::Error;

use crate::basis::{BasisFunctionId, BasisError, BasisFamily};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CopulaError {
    #[error("{family} expects {expected} parameters, got {got}")]
    WrongParamCount {
        family: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("parameter {index} is not finite")]
    NonFiniteParam { index: usize },
    #[error("invalid copula spec: {0}")]
    InvalidSpec(String),
    #[error("spec document parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// The three copula families and their fixed parameter layouts.
///
/// Parameter-to-eigenfunction mapping:
/// * `Sine` (λ₁, λ₂) ↔ √2 cos(kπx), k = 1, 2;
/// * `SineCosine` (λ₁, λ₂, μ₁, μ₂) ↔ √2 cos(2πkx) for λ_k and
///   √2 sin(2πkx) for μ_k, k = 1, 2;
/// * `Legendre` (λ₁, λ₂) ↔ √(2k+1) P_k(2x−1), k = 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Sine,
    SineCosine,
    Legendre,
}

impl Family {
    pub fn param_count(self) -> usize {
        match self {
            Family::SineCosine => 4,
            _ => 2,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::SineCosine => &["lambda1", "lambda2", "mu1", "mu2"],
            _ => &["lambda1", "lambda2"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Sine => "sine",
            Family::SineCosine => "sine-cosine",
            Family::Legendre => "legendre",
        }
    }

    pub fn basis_family(self) -> BasisFamily {
        match self {
            Family::Sine => BasisFamily::HalfCosine,
            Family::SineCosine => BasisFamily::TrigFull,
            Family::Legendre => BasisFamily::Legendre,
        }
    }

    /// Basis functions in the fixed parameter order.
    pub fn basis_ids(self) -> Vec<BasisFunctionId> {
        match self {
            Family::Sine => vec![BasisFunctionId::half_cosine(1), BasisFunctionId::half_cosine(2)],
            Family::SineCosine => vec![
                BasisFunctionId::trig_cosine(1),
                BasisFunctionId::trig_cosine(2),
                BasisFunctionId::trig_sine(1),
                BasisFunctionId::trig_sine(2),
            ],
            Family::Legendre => vec![BasisFunctionId::legendre(1), BasisFunctionId::legendre(2)],
        }
    }

    /// The weighted-L1 parameter region Σ wᵢ|λᵢ| ≤ bound.
    pub fn constraint<R: Real>(self) -> (Vec<R>, R) {
        match self {
            Family::Sine => (vec![R::one(); 2], R::lit(0.5)),
            Family::SineCosine => (vec![R::one(); 4], R::lit(0.5)),
            Family::Legendre => (vec![R::lit(3.0), R::lit(5.0)], R::one()),
        }
    }

    /// The parameter set used throughout the simulation study.
    pub fn study_preset<R: Real>(self) -> CopulaSpec<R> {
        let params = match self {
            Family::Sine => vec![R::lit(0.28), R::lit(-0.15)],
            Family::SineCosine => {
                vec![R::lit(0.14), R::lit(0.13), R::lit(-0.11), R::lit(-0.12)]
            }
            Family::Legendre => vec![R::lit(0.15), R::lit(0.1)],
        };
        CopulaSpec::new(self, params).expect("presets are well-formed")
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "sine" => Some(Family::Sine),
            "sine-cosine" => Some(Family::SineCosine),
            "legendre" => Some(Family::Legendre),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Verdict of a parameter-region check.
#[derive(Debug, Clone, PartialEq)]
pub enum Validity {
    /// Constraint holds strictly.
    Interior,
    /// Constraint holds with equality (within 1e-12). Density and CDF
    /// evaluation are fine; estimators that need strictly positive densities
    /// or interior asymptotics reject these.
    Boundary,
    /// Constraint violated; carries a description.
    Invalid(String),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        !matches!(self, Validity::Invalid(_))
    }

    pub fn is_interior(&self) -> bool {
        matches!(self, Validity::Interior)
    }
}

const BOUNDARY_TOL: f64 = 1e-12;

fn classify<R: Real>(sum: R, bound: R, description: impl Fn() -> String) -> Validity {
    let tol = R::lit(BOUNDARY_TOL);
    if sum < bound - tol {
        Validity::Interior
    } else if sum <= bound + tol {
        Validity::Boundary
    } else {
        Validity::Invalid(description())
    }
}

/// A copula from one of the three families with its parameter vector.
///
/// Construction checks arity and finiteness only; [`CopulaSpec::validate`]
/// reports whether the parameters lie in the family's region. Values are
/// immutable, and all evaluations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaSpec<R> {
    family: Family,
    params: Vec<R>,
}

impl<R: Real> CopulaSpec<R> {
    pub fn new(family: Family, params: Vec<R>) -> Result<Self, CopulaError> {
        if params.len() != family.param_count() {
            return Err(CopulaError::WrongParamCount {
                family: family.name(),
                expected: family.param_count(),
                got: params.len(),
            });
        }
        if let Some(index) = params.iter().position(|p| !p.is_finite()) {
            return Err(CopulaError::NonFiniteParam { index });
        }
        Ok(Self { family, params })
    }

    /// The independence copula of the family (all parameters zero).
    pub fn independence(family: Family) -> Self {
        Self::new(family, vec![R::zero(); family.param_count()]).expect("zero vector is well-formed")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[R] {
        &self.params
    }

    /// Σ wᵢ|λᵢ| for the family constraint.
    pub fn constraint_sum(&self) -> R {
        let (weights, _) = self.family.constraint::<R>();
        self.params
            .iter()
            .zip(weights)
            .map(|(&p, w)| w * p.abs())
            .sum()
    }

    /// Checks the family parameter constraint.
    pub fn validate(&self) -> Validity {
        let (_, bound) = self.family.constraint::<R>();
        let sum = self.constraint_sum();
        classify(sum, bound, || {
            format!(
                "{} constraint violated: weighted parameter sum {} exceeds {}",
                self.family, sum, bound
            )
        })
    }

    fn ensure_valid(&self) -> Result<(), CopulaError> {
        match self.validate() {
            Validity::Invalid(reason) => Err(CopulaError::InvalidSpec(reason)),
            _ => Ok(()),
        }
    }

    /// Copula density c(u, v) = 1 + Σ λ_k φ_k(u) φ_k(v).
    pub fn density(&self, u: R, v: R) -> Result<R, CopulaError> {
        self.ensure_valid()?;
        Ok(self.density_unchecked(u, v))
    }

    pub(crate) fn density_unchecked(&self, u: R, v: R) -> R {
        let two = R::lit(2.0);
        let p = &self.params;
        match self.family {
            Family::Sine => {
                let pi = R::PI();
                R::one()
                    + two * p[0] * (pi * u).cos() * (pi * v).cos()
                    + two * p[1] * (two * pi * u).cos() * (two * pi * v).cos()
            }
            Family::SineCosine => {
                let tau = R::TAU();
                R::one()
                    + two * p[0] * (tau * u).cos() * (tau * v).cos()
                    + two * p[2] * (tau * u).sin() * (tau * v).sin()
                    + two * p[1] * (two * tau * u).cos() * (two * tau * v).cos()
                    + two * p[3] * (two * tau * u).sin() * (two * tau * v).sin()
            }
            Family::Legendre => {
                let three = R::lit(3.0);
                let five = R::lit(5.0);
                let six = R::lit(6.0);
                let l = |x: R| two * x - R::one();
                let q = |x: R| six * x * x - six * x + R::one();
                R::one() + three * p[0] * l(u) * l(v) + five * p[1] * q(u) * q(v)
            }
        }
    }

    /// Copula CDF C(u, v).
    pub fn cdf(&self, u: R, v: R) -> Result<R, CopulaError> {
        self.ensure_valid()?;
        let two = R::lit(2.0);
        let p = &self.params;
        Ok(match self.family {
            Family::Sine => {
                let pi = R::PI();
                let pi2 = pi * pi;
                u * v
                    + two / pi2 * p[0] * (pi * u).sin() * (pi * v).sin()
                    + p[1] / (two * pi2) * (two * pi * u).sin() * (two * pi * v).sin()
            }
            Family::SineCosine => {
                let tau = R::TAU();
                let tau_sq_half = tau * tau / two; // 2π²
                let s = |k: R, x: R| (k * tau * x).sin();
                let omc = |k: R, x: R| R::one() - (k * tau * x).cos();
                let k2 = two;
                u * v
                    + (p[0] * s(R::one(), u) * s(R::one(), v)
                        + p[2] * omc(R::one(), u) * omc(R::one(), v))
                        / tau_sq_half
                    + (p[1] * s(k2, u) * s(k2, v) + p[3] * omc(k2, u) * omc(k2, v))
                        / (tau_sq_half * two * two)
            }
            Family::Legendre => {
                let three = R::lit(3.0);
                let five = R::lit(5.0);
                let a = |x: R| x * x - x;
                let b = |x: R| two * x * x * x - three * x * x + x;
                u * v + three * p[0] * a(u) * a(v) + five * p[1] * b(u) * b(v)
            }
        })
    }

    /// Conditional CDF C,₁(u, v) = ∂C/∂u = ∫₀ᵛ c(u, t) dt — the transition
    /// kernel of the copula-based Markov chain.
    pub fn conditional_cdf(&self, u: R, v: R) -> Result<R, CopulaError> {
        self.ensure_valid()?;
        Ok(self.conditional_cdf_unchecked(u, v))
    }

    pub(crate) fn conditional_cdf_unchecked(&self, u: R, v: R) -> R {
        let two = R::lit(2.0);
        let p = &self.params;
        match self.family {
            Family::Sine => {
                let pi = R::PI();
                v + two * p[0] / pi * (pi * u).cos() * (pi * v).sin()
                    + p[1] / pi * (two * pi * u).cos() * (two * pi * v).sin()
            }
            Family::SineCosine => {
                let tau = R::TAU();
                let pi = R::PI();
                v + p[0] / pi * (tau * u).cos() * (tau * v).sin()
                    + p[2] / pi * (tau * u).sin() * (R::one() - (tau * v).cos())
                    + p[1] / (two * pi) * (two * tau * u).cos() * (two * tau * v).sin()
                    + p[3] / (two * pi) * (two * tau * u).sin() * (R::one() - (two * tau * v).cos())
            }
            Family::Legendre => {
                let three = R::lit(3.0);
                let five = R::lit(5.0);
                let six = R::lit(6.0);
                let iv1 = v * v - v;
                let iv2 = two * v * v * v - three * v * v + v;
                v + three * p[0] * (two * u - R::one()) * iv1
                    + five * p[1] * (six * u * u - six * u + R::one()) * iv2
            }
        }
    }

    /// Parameters pulled to the closest point of the region shrunk by
    /// `margin` in constraint units; a no-op when already that far inside.
    pub fn project_interior(family: Family, params: &[R], margin: R) -> Vec<R> {
        let (weights, bound) = family.constraint::<R>();
        project_onto_weighted_l1(params, &weights, bound - margin)
    }

    /// Serializes the spec as the plain-text key-value document used by the
    /// chain sidecar metadata.
    pub fn to_key_value(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|p| format!("{p}")).collect();
        format!(
            "family = \"{}\"\nparams = [{}]\n",
            self.family.name(),
            params.join(", ")
        )
    }

    /// Parses the key-value document produced by [`CopulaSpec::to_key_value`].
    /// Unknown keys are ignored so sidecar files with extra metadata also load.
    pub fn from_key_value(text: &str) -> Result<Self, CopulaError> {
        let mut family = None;
        let mut params: Option<Vec<R>> = None;
        for line in text.lines() {
            let line = line.trim();
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            match key.trim() {
                "family" => {
                    let name = value.trim().trim_matches('"');
                    family = Some(Family::parse(name).ok_or_else(|| {
                        CopulaError::Parse(format!("unknown family {name:?}"))
                    })?);
                }
                "params" => {
                    let inner = value.trim().trim_start_matches('[').trim_end_matches(']');
                    let mut parsed = Vec::new();
                    for piece in inner.split(',') {
                        let piece = piece.trim();
                        if piece.is_empty() {
                            continue;
                        }
                        let x: f64 = piece
                            .parse()
                            .map_err(|_| CopulaError::Parse(format!("bad number {piece:?}")))?;
                        parsed.push(R::lit(x));
                    }
                    params = Some(parsed);
                }
                _ => {}
            }
        }
        let family = family.ok_or_else(|| CopulaError::Parse("missing family".into()))?;
        let params = params.ok_or_else(|| CopulaError::Parse("missing params".into()))?;
        Self::new(family, params)
    }
}

/// A copula density built from an explicit list of basis functions and
/// coefficients, validated by the general nonnegativity condition
/// 1 + Σ λ_k α_k ≥ 0 with α_k = max φ_k² for λ_k < 0 and
/// α_k = min φ_k · max φ_k for λ_k > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSpec<R> {
    ids: Vec<BasisFunctionId>,
    coefficients: Vec<R>,
}

impl<R: Real> GeneralSpec<R> {
    pub fn new(ids: Vec<BasisFunctionId>, coefficients: Vec<R>) -> Result<Self, CopulaError> {
        if ids.len() != coefficients.len() {
            return Err(CopulaError::InvalidSpec(format!(
                "{} basis ids but {} coefficients",
                ids.len(),
                coefficients.len()
            )));
        }
        if let Some(first) = ids.first() {
            for id in &ids {
                if id.family() != first.family() {
                    return Err(
                        BasisError::FamilyMismatch(first.family(), id.family()).into()
                    );
                }
            }
        }
        for (i, a) in ids.iter().enumerate() {
            if ids[i + 1..].contains(a) {
                return Err(CopulaError::InvalidSpec(format!(
                    "duplicate basis id {a:?}"
                )));
            }
        }
        if let Some(index) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(CopulaError::NonFiniteParam { index });
        }
        Ok(Self { ids, coefficients })
    }

    pub fn ids(&self) -> &[BasisFunctionId] {
        &self.ids
    }

    pub fn coefficients(&self) -> &[R] {
        &self.coefficients
    }

    /// Checks the general validity condition, with the extrema of each φ_k
    /// taken over a uniform 10001-point grid including the endpoints.
    pub fn validate(&self) -> Validity {
        let mut acc = R::one();
        for (id, &coeff) in self.ids.iter().zip(&self.coefficients) {
            if coeff == R::zero() {
                continue;
            }
            let (min, max): (R, R) = grid_extrema(*id);
            let alpha = if coeff < R::zero() {
                let m = max.abs().max(min.abs());
                m * m
            } else {
                min * max
            };
            acc += coeff * alpha;
        }
        // classify() tests sum <= bound; the condition here is acc >= 0,
        // so compare the negation against a zero bound.
        classify(-acc, R::zero(), || {
            format!("nonnegativity condition violated: 1 + Σ λ_k α_k = {acc}")
        })
    }
}

fn grid_extrema<R: Real>(id: BasisFunctionId) -> (R, R) {
    let n = 10_000usize;
    let mut min = R::infinity();
    let mut max = R::neg_infinity();
    for i in 0..=n {
        let x = R::from_count(i) / R::from_count(n);
        let v = id.eval(x);
        min = min.min(v);
        max = max.max(v);
    }
    (min, max)
}

/// Euclidean projection onto the weighted-L1 ball Σ wᵢ|xᵢ| ≤ bound.
///
/// The solution is soft-thresholding xᵢ = sign(yᵢ)·max(|yᵢ| − θwᵢ, 0) with θ
/// found by bisection on the monotone piecewise-linear constraint residual.
pub fn project_onto_weighted_l1<R: Real>(point: &[R], weights: &[R], bound: R) -> Vec<R> {
    let weighted_sum = |theta: R| -> R {
        point
            .iter()
            .zip(weights)
            .map(|(&y, &w)| w * (y.abs() - theta * w).max(R::zero()))
            .sum()
    };
    if weighted_sum(R::zero()) <= bound {
        return point.to_vec();
    }
    let mut lo = R::zero();
    let mut hi = point
        .iter()
        .zip(weights)
        .map(|(&y, &w)| y.abs() / w)
        .fold(R::zero(), |a, b| a.max(b));
    for _ in 0..200 {
        let mid = (lo + hi) / R::lit(2.0);
        if weighted_sum(mid) > bound {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = (lo + hi) / R::lit(2.0);
    point
        .iter()
        .zip(weights)
        .map(|(&y, &w)| y.signum() * (y.abs() - theta * w).max(R::zero()))
        .collect()
}
