//! Command-line harness: simulate copula-based Markov chains, estimate
//! their parameters, and run coverage experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use copula_chains::chain::{simulate, RngStream};
use copula_chains::copula::{CopulaSpec, Family};
use copula_chains::experiment::{run_coverage, NOISE_STREAM_OFFSET};
use copula_chains::io;
use copula_chains::mle::{fit_mle, mle_confidence_intervals};
use copula_chains::moment::{
    asymptotic_sigma, confidence_intervals, estimate_lambda, EstimateReport, Method, SigmaMatrix,
};
use copula_chains::robust::{
    empirical_bandwidth, model_bandwidth, model_second_moment, robust_estimate, transform_series,
    BandwidthVariant,
};

#[derive(Parser)]
#[command(
    name = "copula-chains",
    version,
    about = "Markov chains from perturbed independence copulas: simulation, estimation, coverage studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Copula family: sine | sine-cosine | legendre.
    #[arg(long)]
    family: String,
    /// Comma-separated parameters in family order (sine/legendre: l1,l2;
    /// sine-cosine: l1,l2,m1,m2). Defaults to the family's study preset.
    #[arg(long)]
    params: Option<String>,
}

impl SpecArgs {
    fn family(&self) -> Result<Family, String> {
        Family::parse(&self.family)
            .ok_or_else(|| format!("unknown family {:?} (want sine | sine-cosine | legendre)", self.family))
    }

    fn spec(&self) -> Result<CopulaSpec<f64>, String> {
        let family = self.family()?;
        match &self.params {
            None => Ok(family.study_preset()),
            Some(text) => {
                let params: Result<Vec<f64>, _> =
                    text.split(',').map(|p| p.trim().parse::<f64>()).collect();
                let params = params.map_err(|e| format!("bad --params: {e}"))?;
                let spec = CopulaSpec::new(family, params).map_err(|e| e.to_string())?;
                if !spec.validate().is_valid() {
                    return Err(format!(
                        "parameters violate the {family} constraint: {}",
                        match spec.validate() {
                            copula_chains::copula::Validity::Invalid(reason) => reason,
                            _ => unreachable!(),
                        }
                    ));
                }
                Ok(spec)
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a stationary chain and write it as CSV (plus a .meta sidecar).
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        /// Number of transitions; the CSV holds n+1 values.
        #[arg(long)]
        n: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// RNG stream id (replications use distinct streams).
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate copula parameters from a chain CSV; prints a JSON report.
    Estimate {
        /// Estimator: moment | mle | robust_empirical | robust_model.
        #[arg(long)]
        method: String,
        #[command(flatten)]
        spec: SpecArgs,
        /// Input chain CSV (header "index,u").
        #[arg(long = "in")]
        input: PathBuf,
        /// Significance level for the confidence intervals.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Seed for the robust estimators' auxiliary normal sample.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a coverage experiment from a JSON config; writes the report CSV.
    Coverage {
        /// Experiment config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output_path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Simulate {
            spec,
            n,
            seed,
            stream,
            out,
        } => {
            let spec = spec.spec()?;
            let sample =
                simulate(&spec, n, RngStream::new(seed, stream)).map_err(|e| e.to_string())?;
            io::write_chain_csv(&sample, &out).map_err(|e| e.to_string())?;
            eprintln!("wrote {} values to {}", sample.values.len(), out.display());
            Ok(())
        }
        Command::Estimate {
            method,
            spec,
            input,
            alpha,
            seed,
        } => {
            let method = Method::parse(&method).ok_or_else(|| {
                format!("unknown method {method:?} (want moment | mle | robust_empirical | robust_model)")
            })?;
            let family = spec.family()?;
            let values = io::read_chain_csv(&input).map_err(|e| e.to_string())?;
            let report = estimate(method, family, &values, alpha, seed)?;
            print!("{}", io::estimate_report_json(&report));
            Ok(())
        }
        Command::Coverage { config, out } => {
            let mut config = io::read_experiment_config(&config).map_err(|e| e.to_string())?;
            if let Some(out) = out {
                config.output_path = out.display().to_string();
            }
            let report = run_coverage(&config).map_err(|e| e.to_string())?;
            io::write_coverage_report(&report, &config.output_path).map_err(|e| e.to_string())?;
            eprintln!(
                "wrote {} rows to {}",
                report.rows.len(),
                config.output_path
            );
            Ok(())
        }
    }
}

fn estimate(
    method: Method,
    family: Family,
    values: &[f64],
    alpha: f64,
    seed: u64,
) -> Result<EstimateReport<f64>, String> {
    let n = values.len().saturating_sub(1);
    let ids = family.basis_ids();
    let s = ids.len();
    match method {
        Method::Moment => {
            let estimates = estimate_lambda(values, &ids).map_err(|e| e.to_string())?;
            let plug_in = CopulaSpec::project_interior(family, &estimates, 1e-6);
            let sigma = asymptotic_sigma(family, &plug_in).map_err(|e| e.to_string())?;
            let intervals =
                confidence_intervals(&estimates, &sigma, n, alpha).map_err(|e| e.to_string())?;
            Ok(EstimateReport {
                method,
                estimates,
                sigma,
                intervals,
                alpha,
                n,
                bandwidths: None,
            })
        }
        Method::Mle => {
            let fit = fit_mle(values, family, 1e-8).map_err(|e| e.to_string())?;
            let intervals = mle_confidence_intervals(&fit, alpha).map_err(|e| e.to_string())?;
            Ok(EstimateReport {
                method,
                estimates: fit.estimates,
                sigma: fit.information,
                intervals,
                alpha,
                n,
                bandwidths: None,
            })
        }
        Method::RobustEmpirical | Method::RobustModel => {
            let noise = RngStream::new(seed, NOISE_STREAM_OFFSET)
                .source()
                .standard_normals::<f64>(n);
            let moments = estimate_lambda(values, &ids).map_err(|e| e.to_string())?;
            let plug_in = CopulaSpec::project_interior(family, &moments, 1e-6);
            let mut estimates = Vec::with_capacity(s);
            let mut intervals = Vec::with_capacity(s);
            let mut bandwidths = Vec::with_capacity(s);
            let mut variances = vec![0.0; s * s];
            for k in 1..=s {
                let y = transform_series(values, ids[k - 1]).map_err(|e| e.to_string())?;
                let (h, msq, variant) = if method == Method::RobustEmpirical {
                    let h = empirical_bandwidth(&y).map_err(|e| e.to_string())?;
                    let msq = y.iter().map(|&v| v * v).sum::<f64>() / y.len() as f64;
                    (h, msq, BandwidthVariant::Empirical)
                } else {
                    let h = model_bandwidth(family, k, &plug_in, n).map_err(|e| e.to_string())?;
                    let msq = model_second_moment(family, k, &plug_in).map_err(|e| e.to_string())?;
                    (h, msq, BandwidthVariant::Model)
                };
                let est = robust_estimate(&y, h, &noise, msq, variant, alpha)
                    .map_err(|e| e.to_string())?;
                // Per-parameter kernel variance proxy, so the usual
                // λ ± z √(Σ_kk / n) formula reproduces the interval width.
                variances[(k - 1) * s + (k - 1)] = msq / (h * std::f64::consts::SQRT_2);
                estimates.push(est.raw);
                intervals.push(est.interval);
                bandwidths.push(h);
            }
            let sigma = SigmaMatrix::from_entries(s, variances).map_err(|e| e.to_string())?;
            Ok(EstimateReport {
                method,
                estimates,
                sigma,
                intervals,
                alpha,
                n,
                bandwidths: Some(bandwidths),
            })
        }
    }
}
