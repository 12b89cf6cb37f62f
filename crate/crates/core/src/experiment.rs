//! Batch runner for the coverage study: simulate chains, run the selected
//! estimators, and count how often each parameter's confidence interval
//! covers the truth.
//!
//! Replication r draws its chain from stream `(base_seed, r)` and its
//! auxiliary normal sample from stream `(base_seed, r + NOISE_STREAM_OFFSET)`,
//! so replications are mutually independent, the noise is independent of the
//! chain, and the whole report is reproducible byte for byte. Replications
//! run in parallel; aggregation reduces in replication order, so the output
//! does not depend on scheduling.

use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{simulate, ChainError, RngStream};
use crate::copula::CopulaSpec;
use crate::mle::{fit_mle, mle_confidence_intervals};
use crate::moment::{
    asymptotic_sigma, confidence_intervals, estimate_lambda, Method, MomentError,
};
use crate::robust::{
    empirical_bandwidth, model_bandwidth, model_second_moment, robust_estimate, transform_series,
    BandwidthVariant,
};

/// Stream-id offset separating the robust estimator's noise streams from the
/// chain streams.
pub const NOISE_STREAM_OFFSET: u64 = 1 << 32;

/// Margin used when plugging estimates into interior-only formulas: point
/// estimates outside (or too close to) the constraint boundary are pulled to
/// the nearest point this far inside, per constraint units.
const PLUG_IN_MARGIN: f64 = 1e-6;

const MLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// Full description of a coverage experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// True data-generating copula.
    pub spec: CopulaSpec<f64>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub alpha: f64,
    pub estimators: Vec<Method>,
    pub base_seed: u64,
    /// Where the CLI writes the report CSV; unused by [`run_coverage`] itself.
    pub output_path: String,
}

impl ExperimentConfig {
    /// Desk-scale defaults: sample sizes 1999 and 4999, 100 replications,
    /// α = 0.05, all four estimators.
    pub fn new(spec: CopulaSpec<f64>, base_seed: u64, output_path: impl Into<String>) -> Self {
        Self {
            spec,
            sample_sizes: vec![1999, 4999],
            replications: 100,
            alpha: 0.05,
            estimators: vec![
                Method::Moment,
                Method::Mle,
                Method::RobustEmpirical,
                Method::RobustModel,
            ],
            base_seed,
            output_path: output_path.into(),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !self.spec.validate().is_valid() {
            return Err(ExperimentError::InvalidConfig(
                "spec parameters violate the family constraint".into(),
            ));
        }
        if self.replications == 0 {
            return Err(ExperimentError::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ExperimentError::InvalidConfig(format!(
                "alpha {} must lie in (0, 1)",
                self.alpha
            )));
        }
        if self.sample_sizes.is_empty() {
            return Err(ExperimentError::InvalidConfig(
                "at least one sample size is required".into(),
            ));
        }
        if self.sample_sizes.iter().any(|&n| n < 2) {
            return Err(ExperimentError::InvalidConfig(
                "sample sizes must be at least 2".into(),
            ));
        }
        if self.estimators.is_empty() {
            return Err(ExperimentError::InvalidConfig(
                "at least one estimator must be selected".into(),
            ));
        }
        Ok(())
    }
}

/// One aggregated line of the coverage report.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub estimator: Method,
    pub parameter: &'static str,
    pub n: usize,
    pub coverage_count: usize,
    pub replications: usize,
    pub mean_ci_length: f64,
    pub mean_estimate: f64,
    pub failures: usize,
}

/// Aggregated coverage counts and mean interval lengths per
/// (estimator, parameter, sample size).
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub fn find(&self, estimator: Method, parameter: &str, n: usize) -> Option<&CoverageRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.parameter == parameter && r.n == n)
    }
}

/// Per-parameter outcome of one estimator on one replication.
#[derive(Debug, Clone, Copy)]
struct ParamOutcome {
    estimate: f64,
    lower: f64,
    upper: f64,
}

type EstimatorOutcomes = Vec<Option<ParamOutcome>>;

/// Runs the experiment and aggregates coverage counts, mean CI lengths and
/// mean point estimates. Estimator failures (boundary fits, degenerate
/// bandwidths) count toward neither the coverage numerator nor denominator;
/// they are reported in the `failures` column.
pub fn run_coverage(config: &ExperimentConfig) -> Result<CoverageReport, ExperimentError> {
    config.validate()?;
    let family = config.spec.family();
    let s = family.param_count();
    let truth = config.spec.params().to_vec();
    let names = family.param_names();

    let mut rows = Vec::new();
    for &n in &config.sample_sizes {
        let outcomes: Vec<Result<Vec<EstimatorOutcomes>, ExperimentError>> = (0..config
            .replications)
            .into_par_iter()
            .map(|r| run_replication(config, n, r as u64))
            .collect();

        for (e_idx, &estimator) in config.estimators.iter().enumerate() {
            for k in 0..s {
                let mut coverage_count = 0usize;
                let mut failures = 0usize;
                let mut len_sum = 0.0;
                let mut est_sum = 0.0;
                for rep in &outcomes {
                    let rep = rep.as_ref().map_err(|e| e.clone())?;
                    match rep[e_idx][k] {
                        Some(out) => {
                            if out.lower <= truth[k] && truth[k] <= out.upper {
                                coverage_count += 1;
                            }
                            len_sum += out.upper - out.lower;
                            est_sum += out.estimate;
                        }
                        None => failures += 1,
                    }
                }
                let successes = config.replications - failures;
                let (mean_ci_length, mean_estimate) = if successes > 0 {
                    (len_sum / successes as f64, est_sum / successes as f64)
                } else {
                    (0.0, 0.0)
                };
                rows.push(CoverageRow {
                    estimator,
                    parameter: names[k],
                    n,
                    coverage_count,
                    replications: config.replications,
                    mean_ci_length,
                    mean_estimate,
                    failures,
                });
            }
        }
    }
    Ok(CoverageReport { rows })
}

fn run_replication(
    config: &ExperimentConfig,
    n: usize,
    replication: u64,
) -> Result<Vec<EstimatorOutcomes>, ExperimentError> {
    let family = config.spec.family();
    let s = family.param_count();
    let ids = family.basis_ids();
    let alpha = config.alpha;

    let sample = simulate(
        &config.spec,
        n,
        RngStream::new(config.base_seed, replication),
    )?;
    let values = &sample.values;

    let needs_noise = config
        .estimators
        .iter()
        .any(|m| matches!(m, Method::RobustEmpirical | Method::RobustModel));
    let noise: Vec<f64> = if needs_noise {
        RngStream::new(config.base_seed, replication + NOISE_STREAM_OFFSET)
            .source()
            .standard_normals(n)
    } else {
        Vec::new()
    };

    let needs_moment = config
        .estimators
        .iter()
        .any(|m| matches!(m, Method::Moment | Method::RobustModel));
    let moment_estimates = if needs_moment {
        Some(estimate_lambda(values, &ids)?)
    } else {
        None
    };

    let mut all = Vec::with_capacity(config.estimators.len());
    for &estimator in &config.estimators {
        let outcomes: EstimatorOutcomes = match estimator {
            Method::Moment => {
                let lambda = moment_estimates.as_ref().expect("computed above");
                let plug_in = CopulaSpec::project_interior(family, lambda, PLUG_IN_MARGIN);
                let sigma = asymptotic_sigma(family, &plug_in)?;
                let cis = confidence_intervals(lambda, &sigma, n, alpha)?;
                lambda
                    .iter()
                    .zip(cis)
                    .map(|(&estimate, (lower, upper))| {
                        Some(ParamOutcome {
                            estimate,
                            lower,
                            upper,
                        })
                    })
                    .collect()
            }
            Method::Mle => match fit_mle(values, family, MLE_TOL) {
                Ok(fit) if fit.converged && !fit.at_boundary => {
                    match mle_confidence_intervals(&fit, alpha) {
                        Ok(cis) => fit
                            .estimates
                            .iter()
                            .zip(cis)
                            .map(|(&estimate, (lower, upper))| {
                                Some(ParamOutcome {
                                    estimate,
                                    lower,
                                    upper,
                                })
                            })
                            .collect(),
                        Err(_) => vec![None; s],
                    }
                }
                _ => vec![None; s],
            },
            Method::RobustEmpirical => (1..=s)
                .map(|k| {
                    let y = transform_series(values, ids[k - 1]).ok()?;
                    let h = empirical_bandwidth(&y).ok()?;
                    let mean_sq = y.iter().map(|&v| v * v).sum::<f64>() / y.len() as f64;
                    let est =
                        robust_estimate(&y, h, &noise, mean_sq, BandwidthVariant::Empirical, alpha)
                            .ok()?;
                    Some(ParamOutcome {
                        estimate: est.raw,
                        lower: est.interval.0,
                        upper: est.interval.1,
                    })
                })
                .collect(),
            Method::RobustModel => {
                let lambda = moment_estimates.as_ref().expect("computed above");
                let plug_in = CopulaSpec::project_interior(family, lambda, PLUG_IN_MARGIN);
                (1..=s)
                    .map(|k| {
                        let y = transform_series(values, ids[k - 1]).ok()?;
                        let h = model_bandwidth(family, k, &plug_in, n).ok()?;
                        let msq = model_second_moment(family, k, &plug_in).ok()?;
                        let est =
                            robust_estimate(&y, h, &noise, msq, BandwidthVariant::Model, alpha)
                                .ok()?;
                        Some(ParamOutcome {
                            estimate: est.raw,
                            lower: est.interval.0,
                            upper: est.interval.1,
                        })
                    })
                    .collect()
            }
        };
        all.push(outcomes);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::Family;

    fn small_config() -> ExperimentConfig {
        let mut config = ExperimentConfig::new(Family::Sine.study_preset(), 99, "out.csv");
        config.sample_sizes = vec![199];
        config.replications = 3;
        config
    }

    #[test]
    fn defaults_are_desk_scale() {
        let config = ExperimentConfig::new(Family::Sine.study_preset(), 1, "x.csv");
        assert_eq!(config.sample_sizes, vec![1999, 4999]);
        assert_eq!(config.replications, 100);
        assert_eq!(config.alpha, 0.05);
        assert_eq!(config.estimators.len(), 4);
    }

    #[test]
    fn config_validation() {
        let mut config = small_config();
        config.replications = 0;
        assert!(config.validate().is_err());
        let mut config = small_config();
        config.alpha = 1.0;
        assert!(config.validate().is_err());
        let mut config = small_config();
        config.spec = CopulaSpec::new(Family::Sine, vec![0.4, 0.2]).unwrap();
        assert!(config.validate().is_err());
        // The boundary-valid study preset is accepted.
        let mut config = small_config();
        config.spec = Family::SineCosine.study_preset();
        assert!(config.validate().is_ok());
    }

    #[test]
    fn single_replication_counts_are_binary() {
        let mut config = small_config();
        config.replications = 1;
        config.estimators = vec![Method::Moment];
        let report = run_coverage(&config).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert!(row.coverage_count <= 1);
            assert_eq!(row.replications, 1);
            assert_eq!(row.failures, 0);
            assert!(row.mean_ci_length > 0.0);
        }
    }

    #[test]
    fn report_is_deterministic() {
        let config = small_config();
        let a = run_coverage(&config).unwrap();
        let b = run_coverage(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn all_estimators_produce_rows() {
        let mut config = small_config();
        config.sample_sizes = vec![299];
        let report = run_coverage(&config).unwrap();
        // 4 estimators × 2 parameters × 1 sample size.
        assert_eq!(report.rows.len(), 8);
        let row = report.find(Method::Moment, "lambda1", 299).unwrap();
        assert_eq!(row.coverage_count + row.failures <= row.replications, true);
    }
}
