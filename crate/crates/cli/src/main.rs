//! Command-line driver for nonlinear Hodge experiments.
//!
//! Exit codes:
//!   0  success
//!   1  a requested verification check failed beyond tolerance
//!   2  solver did not converge (or could not stay subsonic)
//!   3  hypothesis violated (dimension/degree/density domain)
//!   4  geometry error (ball or variation support exits the domain)
//!   5  I/O or snapshot error
//!   6  invalid configuration

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use nlhodge::HodgeError;

mod commands;
mod config;
mod report;

use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] HodgeError),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("checks failed: {}", .0.join(", "))]
    ChecksFailed(Vec<String>),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Core(e) => match e {
                HodgeError::NonConvergence { .. } | HodgeError::SubsonicViolation { .. } => 2,
                HodgeError::DimensionHypothesis { .. }
                | HodgeError::Degree { .. }
                | HodgeError::DensityDomain { .. } => 3,
                HodgeError::Geometry { .. } => 4,
                HodgeError::Io(_) | HodgeError::Snapshot { .. } => 5,
                HodgeError::Invalid { .. }
                | HodgeError::Mismatch { .. }
                | HodgeError::GaugeInvalid { .. } => 6,
            },
            CliError::Io(_) => 5,
            CliError::Config(_) => 6,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "nlhodge",
    about = "Stationary fields of nonlinear Hodge energies on cubical complexes, \
             with monotonicity, gauge, and cutoff verification harnesses",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; execution is deterministic for any value.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Seed for the seeded random inputs of refinement checks
    /// (overrides the config seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a stationary boundary problem and write field + convergence log.
    Solve,
    /// Run verification checks on a catalog field or snapshot.
    Verify,
    /// Repeat a named check across 2x grid refinements and fit the order.
    Refine,
    /// List the analytic field catalog.
    Catalog,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    let mut cfg = ExperimentConfig::load(cli.config.as_ref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Solve => commands::run_solve(&cfg, &out_dir),
        Command::Verify => commands::run_verify(&cfg, &out_dir),
        Command::Refine => commands::run_refine(&cfg, &out_dir),
        Command::Catalog => {
            commands::run_catalog();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
