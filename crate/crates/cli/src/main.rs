//! rgl — batch experiments on the sandwiched Rényi divergence geometry.
//!
//! Subcommands evaluate the divergence family on serialized states, rerun
//! the bundled two-sided α→0 limit example, scan the geometric quantities
//! over an α grid, and drive the randomized monotonicity experiments. Every
//! run emits a JSON (schema "rgl/1") or CSV report.
//!
//! Exit codes: 0 — all expectations met; 1 — an expectation failed
//! (unexpected violation, failed reproduction, or an I/O failure while
//! writing the report); 2 — usage or input errors.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand};
use report::{Format, Report, Status};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "rgl",
    version,
    about = "sandwiched Rényi divergence geometry lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Master seed; falls back to the RGL_SEED environment variable, then 0.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the subcommand's primary tolerance.
    #[arg(long)]
    tol: Option<f64>,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,

    /// Cap worker threads (default: machine logical cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn resolve_seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            std::env::var("RGL_SEED")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(0)
        })
    }
}

/// Grid selection shared by the α-indexed subcommands.
#[derive(Args, Clone, Debug)]
struct AlphaSelect {
    /// Explicit α values (repeatable).
    #[arg(long = "alpha", num_args = 1.., allow_negative_numbers = true)]
    alpha: Vec<f64>,

    /// Dense α grid as start:stop:step.
    #[arg(long = "alpha-grid", allow_hyphen_values = true)]
    alpha_grid: Option<String>,
}

#[derive(Args, Clone, Debug)]
struct BetaSelect {
    /// Explicit β values (repeatable).
    #[arg(long = "beta", num_args = 1.., allow_negative_numbers = true)]
    beta: Vec<f64>,

    /// Dense β grid as start:stop:step.
    #[arg(long = "beta-grid", allow_hyphen_values = true)]
    beta_grid: Option<String>,
}

#[derive(Subcommand, Clone, Debug)]
enum Command {
    /// Evaluate ψ, D_α, and the relative entropy on a pair of state files.
    Divergence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        alphas: AlphaSelect,
        /// First state (JSON matrix document); defaults to the bundled pair.
        #[arg(long)]
        rho: Option<PathBuf>,
        /// Second state; defaults to the bundled pair.
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
    /// Reproduce the bundled two-sided α→0 limit example and its spectrum.
    #[command(name = "appendix-a")]
    AppendixA {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate divergence, metric spectrum, duality residual, and curvature
    /// over an α grid for a seeded state.
    ScanAlpha {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        alphas: AlphaSelect,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Seed the second slot separately (defaults to σ = ρ).
        #[arg(long)]
        sigma_seed: Option<u64>,
    },
    /// Operator-monotonicity search for the kernel family over a β grid.
    MonotoneF {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        betas: BetaSelect,
        /// Matrix dimensions to sample (repeatable).
        #[arg(long = "dim", num_args = 1.., default_values_t = [2usize, 3, 4])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Succeed only if every cell produces a counterexample.
        #[arg(long)]
        expect_violation: bool,
    },
    /// Metric monotonicity under random CPTP maps over an α grid.
    MonotoneMetric {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        alphas: AlphaSelect,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long)]
        expect_violation: bool,
    },
    /// Divergence monotonicity under random CPTP maps over an α grid.
    MonotoneDivergence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        alphas: AlphaSelect,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Which variant: the rescaled divergence or the relative entropy.
        #[arg(long, value_enum, default_value = "rescaled")]
        variant: commands::Variant,
        #[arg(long)]
        expect_violation: bool,
    },
    /// Curvature reports over an α grid for seeded random states.
    Flatness {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        alphas: AlphaSelect,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Number of seeded base states.
        #[arg(long, default_value_t = 10)]
        states: usize,
        /// Evaluate the connections at a different α (report-only scan of
        /// mismatched structures).
        #[arg(long, allow_hyphen_values = true)]
        connection_alpha: Option<f64>,
    },
    /// Positivity and data-processing checks over an α grid.
    Positivity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        alphas: AlphaSelect,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Pinching fixed-point, majorization, and strict-convexity checks.
    PinchingLemmas {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 10000)]
        trials: u64,
    },
}

/// Failures that map onto the two non-zero exit codes.
pub enum CliError {
    /// Bad usage or malformed inputs → exit 2.
    Usage(String),
    /// A runtime/numerical failure → exit 1.
    Failure(String),
}

impl From<rgl_core::Error> for CliError {
    fn from(e: rgl_core::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "grid must be start:stop:step, got '{spec}'"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad grid number '{p}'")))
        })
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start {
        return Err(CliError::Usage(
            "grid needs stop ≥ start and step > 0".into(),
        ));
    }
    let mut values = Vec::new();
    let count = ((stop - start) / step).round() as usize;
    for k in 0..=count {
        let v = start + step * k as f64;
        if v <= stop + 1e-12 {
            values.push(v);
        }
    }
    Ok(values)
}

fn collect(select_values: &[f64], grid: &Option<String>) -> Result<Vec<f64>, CliError> {
    let mut values = select_values.to_vec();
    if let Some(spec) = grid {
        values.extend(parse_grid(spec)?);
    }
    if values.is_empty() {
        return Err(CliError::Usage(
            "an explicit value list or a grid is required".into(),
        ));
    }
    Ok(values)
}

impl AlphaSelect {
    fn values(&self) -> Result<Vec<f64>, CliError> {
        collect(&self.alpha, &self.alpha_grid)
    }

    fn values_or(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        if self.alpha.is_empty() && self.alpha_grid.is_none() {
            Ok(default.to_vec())
        } else {
            self.values()
        }
    }
}

impl BetaSelect {
    fn values(&self) -> Result<Vec<f64>, CliError> {
        collect(&self.beta, &self.beta_grid)
    }
}

fn configure_threads(common: &Common) {
    if let Some(n) = common.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<(Report, Common), CliError> {
    match cli.command {
        Command::Divergence {
            common,
            alphas,
            rho,
            sigma,
        } => {
            configure_threads(&common);
            let report = commands::divergence(
                &common,
                alphas.values_or(&[0.5])?,
                rho.as_deref(),
                sigma.as_deref(),
            )?;
            Ok((report, common))
        }
        Command::AppendixA { common } => {
            configure_threads(&common);
            let report = commands::appendix_a(&common)?;
            Ok((report, common))
        }
        Command::ScanAlpha {
            common,
            alphas,
            dim,
            sigma_seed,
        } => {
            configure_threads(&common);
            let report = commands::scan_alpha(&common, alphas.values()?, dim, sigma_seed)?;
            Ok((report, common))
        }
        Command::MonotoneF {
            common,
            betas,
            dims,
            trials,
            expect_violation,
        } => {
            configure_threads(&common);
            let report =
                commands::monotone_f(&common, betas.values()?, &dims, trials, expect_violation)?;
            Ok((report, common))
        }
        Command::MonotoneMetric {
            common,
            alphas,
            dim,
            trials,
            expect_violation,
        } => {
            configure_threads(&common);
            let report = commands::monotone_metric(
                &common,
                alphas.values()?,
                dim,
                trials,
                expect_violation,
            )?;
            Ok((report, common))
        }
        Command::MonotoneDivergence {
            common,
            alphas,
            dim,
            trials,
            variant,
            expect_violation,
        } => {
            configure_threads(&common);
            let report = commands::monotone_divergence(
                &common,
                alphas.values()?,
                dim,
                trials,
                variant,
                expect_violation,
            )?;
            Ok((report, common))
        }
        Command::Flatness {
            common,
            alphas,
            dim,
            states,
            connection_alpha,
        } => {
            configure_threads(&common);
            let report = commands::flatness(
                &common,
                alphas.values_or(&[0.5, 1.0, 2.0])?,
                dim,
                states,
                connection_alpha,
            )?;
            Ok((report, common))
        }
        Command::Positivity {
            common,
            alphas,
            dim,
            trials,
        } => {
            configure_threads(&common);
            let report = commands::positivity(
                &common,
                alphas.values_or(&[-3.0, -1.0, -0.3, 0.3, 0.5, 0.7, 1.0, 2.0, 5.0])?,
                dim,
                trials,
            )?;
            Ok((report, common))
        }
        Command::PinchingLemmas {
            common,
            dim,
            trials,
        } => {
            configure_threads(&common);
            let report = commands::pinching_lemmas(&common, dim, trials)?;
            Ok((report, common))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok((report, common)) => {
            if let Err(e) = report::check_writable(common.out.as_deref()) {
                eprintln!("rgl: output path is not writable: {e}");
                std::process::exit(2);
            }
            let status = report.status;
            if let Err(e) = report::emit(&report, common.format, common.out.as_deref()) {
                eprintln!("rgl: failed to write report: {e}");
                std::process::exit(1);
            }
            std::process::exit(match status {
                Status::Ok => 0,
                Status::Violation => 1,
            });
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("rgl: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("rgl: {msg}");
            std::process::exit(1);
        }
    }
}
