//! File formats: chain CSV with sidecar metadata, estimate reports as JSON,
//! experiment configs as JSON, and the coverage report CSV.
//!
//! All writers format through Rust's shortest-round-trip float formatting,
//! so identical inputs produce byte-identical documents on every platform.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::ChainSample;
use crate::copula::{CopulaSpec, Family};
use crate::experiment::{CoverageReport, ExperimentConfig};
use crate::moment::{EstimateReport, Method, SigmaMatrix};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Renders a chain as CSV with header `index,u`.
pub fn chain_csv_string(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20 + 8);
    out.push_str("index,u\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

/// Writes the chain CSV and a sidecar metadata document (`<path>.meta`)
/// recording the generating spec and seed.
pub fn write_chain_csv(sample: &ChainSample<f64>, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(chain_csv_string(&sample.values).as_bytes())?;
    let meta_path = sidecar_path(path);
    fs::write(meta_path, chain_metadata_string(sample))?;
    Ok(())
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta");
    os.into()
}

/// The sidecar metadata document: spec key-values plus seed and stream.
pub fn chain_metadata_string(sample: &ChainSample<f64>) -> String {
    format!(
        "{}seed = {}\nstream = {}\nn = {}\n",
        sample.spec.to_key_value(),
        sample.rng.seed,
        sample.rng.stream_id,
        sample.n
    )
}

/// Reads a chain CSV produced by [`write_chain_csv`] (or any `index,u` file).
pub fn read_chain_csv(path: impl AsRef<Path>) -> Result<Vec<f64>, IoError> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 {
            if line != "index,u" {
                return Err(IoError::Parse(format!(
                    "expected header 'index,u', found {line:?}"
                )));
            }
            continue;
        }
        let field = line
            .split(',')
            .nth(1)
            .ok_or_else(|| IoError::Parse(format!("line {}: missing value column", lineno + 1)))?;
        let v: f64 = field
            .trim()
            .parse()
            .map_err(|_| IoError::Parse(format!("line {}: bad value {field:?}", lineno + 1)))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(IoError::Parse(format!(
                "line {}: value {v} outside [0, 1]",
                lineno + 1
            )));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(IoError::Parse("no data rows".into()));
    }
    Ok(values)
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    family: String,
    params: Vec<f64>,
}

impl SpecDoc {
    fn from_spec(spec: &CopulaSpec<f64>) -> Self {
        Self {
            family: spec.family().name().to_string(),
            params: spec.params().to_vec(),
        }
    }

    fn to_spec(&self) -> Result<CopulaSpec<f64>, IoError> {
        let family = Family::parse(&self.family)
            .ok_or_else(|| IoError::Parse(format!("unknown family {:?}", self.family)))?;
        CopulaSpec::new(family, self.params.clone()).map_err(|e| IoError::Parse(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct ReportDoc {
    method: String,
    estimates: Vec<f64>,
    /// Row-major s×s covariance or information matrix.
    sigma: Vec<f64>,
    intervals: Vec<[f64; 2]>,
    alpha: f64,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bandwidths: Option<Vec<f64>>,
}

/// Serializes an estimate report as a JSON document.
pub fn estimate_report_json(report: &EstimateReport<f64>) -> String {
    let doc = ReportDoc {
        method: report.method.name().to_string(),
        estimates: report.estimates.clone(),
        sigma: report.sigma.entries().to_vec(),
        intervals: report.intervals.iter().map(|&(lo, hi)| [lo, hi]).collect(),
        alpha: report.alpha,
        n: report.n,
        bandwidths: report.bandwidths.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}

/// Parses an estimate report JSON document.
pub fn read_estimate_report_json(text: &str) -> Result<EstimateReport<f64>, IoError> {
    let doc: ReportDoc = serde_json::from_str(text)?;
    let method = Method::parse(&doc.method)
        .ok_or_else(|| IoError::Parse(format!("unknown method {:?}", doc.method)))?;
    let dim = doc.estimates.len();
    let sigma = SigmaMatrix::from_entries(dim, doc.sigma)
        .map_err(|e| IoError::Parse(e.to_string()))?;
    Ok(EstimateReport {
        method,
        estimates: doc.estimates,
        sigma,
        intervals: doc.intervals.iter().map(|&[lo, hi]| (lo, hi)).collect(),
        alpha: doc.alpha,
        n: doc.n,
        bandwidths: doc.bandwidths,
    })
}

fn default_sample_sizes() -> Vec<usize> {
    vec![1999, 4999]
}

fn default_replications() -> usize {
    100
}

fn default_alpha() -> f64 {
    0.05
}

fn default_estimators() -> Vec<String> {
    ["moment", "mle", "robust_empirical", "robust_model"]
        .map(String::from)
        .to_vec()
}

#[derive(Serialize, Deserialize)]
struct ConfigDoc {
    spec: SpecDoc,
    #[serde(default = "default_sample_sizes")]
    sample_sizes: Vec<usize>,
    #[serde(default = "default_replications")]
    replications: usize,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_estimators")]
    estimators: Vec<String>,
    #[serde(default)]
    base_seed: u64,
    output_path: String,
}

/// Parses an experiment config JSON document. Omitted fields take the
/// desk-scale defaults (sample sizes 1999/4999, 100 replications, α = 0.05,
/// all four estimators, seed 0).
pub fn experiment_config_from_json(text: &str) -> Result<ExperimentConfig, IoError> {
    let doc: ConfigDoc = serde_json::from_str(text)?;
    let spec = doc.spec.to_spec()?;
    let estimators = doc
        .estimators
        .iter()
        .map(|name| {
            Method::parse(name)
                .ok_or_else(|| IoError::Parse(format!("unknown estimator {name:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentConfig {
        spec,
        sample_sizes: doc.sample_sizes,
        replications: doc.replications,
        alpha: doc.alpha,
        estimators,
        base_seed: doc.base_seed,
        output_path: doc.output_path,
    })
}

/// Serializes an experiment config as JSON.
pub fn experiment_config_json(config: &ExperimentConfig) -> String {
    let doc = ConfigDoc {
        spec: SpecDoc::from_spec(&config.spec),
        sample_sizes: config.sample_sizes.clone(),
        replications: config.replications,
        alpha: config.alpha,
        estimators: config
            .estimators
            .iter()
            .map(|m| m.name().to_string())
            .collect(),
        base_seed: config.base_seed,
        output_path: config.output_path.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("config serializes");
    text.push('\n');
    text
}

/// Reads an experiment config from a JSON file.
pub fn read_experiment_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, IoError> {
    experiment_config_from_json(&fs::read_to_string(path)?)
}

/// Renders the coverage report as CSV, one row per
/// (estimator, parameter, sample size).
pub fn coverage_report_csv(report: &CoverageReport) -> String {
    let mut out = String::from(
        "estimator,parameter,n,coverage_count,replications,mean_ci_length,mean_estimate,failures\n",
    );
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.estimator.name(),
            row.parameter,
            row.n,
            row.coverage_count,
            row.replications,
            row.mean_ci_length,
            row.mean_estimate,
            row.failures
        ));
    }
    out
}

/// Writes the coverage report CSV to `path`, creating parent directories.
pub fn write_coverage_report(report: &CoverageReport, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, coverage_report_csv(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{simulate, RngStream};

    #[test]
    fn chain_csv_round_trip() {
        let spec = Family::Sine.study_preset::<f64>();
        let sample = simulate(&spec, 25, RngStream::new(5, 0)).unwrap();
        let dir = std::env::temp_dir().join("copula_chains_io_test");
        let path = dir.join("chain.csv");
        write_chain_csv(&sample, &path).unwrap();
        let back = read_chain_csv(&path).unwrap();
        assert_eq!(back, sample.values);
        let meta = fs::read_to_string(dir.join("chain.csv.meta")).unwrap();
        assert!(meta.contains("family = \"sine\""));
        assert!(meta.contains("seed = 5"));
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn chain_csv_header_is_exact() {
        let text = chain_csv_string(&[0.25, 0.5]);
        assert!(text.starts_with("index,u\n0,0.25\n1,0.5\n"));
        assert!(read_chain_csv_from_str("u,index\n0,0.5\n").is_err());
    }

    fn read_chain_csv_from_str(text: &str) -> Result<Vec<f64>, IoError> {
        let dir = std::env::temp_dir().join("copula_chains_io_hdr");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        fs::write(&path, text).unwrap();
        read_chain_csv(&path)
    }

    #[test]
    fn config_defaults_fill_in() {
        let json = r#"{
            "spec": {"family": "legendre", "params": [0.15, 0.1]},
            "output_path": "report.csv"
        }"#;
        let config = experiment_config_from_json(json).unwrap();
        assert_eq!(config.sample_sizes, vec![1999, 4999]);
        assert_eq!(config.replications, 100);
        assert_eq!(config.alpha, 0.05);
        assert_eq!(config.estimators.len(), 4);
        assert_eq!(config.base_seed, 0);
        // Round trip.
        let text = experiment_config_json(&config);
        let back = experiment_config_from_json(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn report_json_round_trip() {
        let report = EstimateReport {
            method: Method::Moment,
            estimates: vec![0.3, -0.1],
            sigma: SigmaMatrix::identity(2),
            intervals: vec![(0.25, 0.35), (-0.15, -0.05)],
            alpha: 0.05,
            n: 999,
            bandwidths: None,
        };
        let text = estimate_report_json(&report);
        let back = read_estimate_report_json(&text).unwrap();
        assert_eq!(report, back);
        assert!(!text.contains("bandwidths"));
    }
}
