//! `qjc`: spectra, symmetry checks, QES analysis and spectral-flow figures
//! for the extended Jaynes–Cummings family.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure or incomplete sweep.

mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qjc_core::error::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Numerical(String),
    #[error("sweep incomplete: {0}")]
    Incomplete(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_)
            | CliError::Core(
                CoreError::InvalidSpace(_)
                | CoreError::InvalidParams(_)
                | CoreError::CutoffTooSmall { .. }
                | CoreError::DimensionMismatch { .. }
                | CoreError::AngleKindMismatch { .. }
                | CoreError::InvalidSweep(_),
            ) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qjc",
    version,
    about = "Extended Jaynes-Cummings spectra and symmetry checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Labeled eigenvalue table (closed-form, numeric, qes, recurrence).
    Spectrum(commands::SpectrumArgs),
    /// Hermiticity, PT and pseudo-hermiticity report as JSON.
    Check(commands::CheckArgs),
    /// Invariant subspace and certified algebraic eigenpairs of H_T.
    Qes(commands::QesArgs),
    /// Series recurrence: critical and truncation polynomials, roots.
    Recur(commands::RecurArgs),
    /// Level trajectories and events over a parameter range.
    Sweep(commands::SweepArgs),
    /// Regenerates the figure data sets (CSV + SVG).
    Figures(commands::FiguresArgs),
    /// Compares polynomial-space and Fock-space spectra.
    PolyrepCheck(commands::PolyrepArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QJC_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!("QJC_THREADS must be a positive integer, got '{v}'"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("QJC_THREADS: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Spectrum(a) => commands::cmd_spectrum(a),
        Command::Check(a) => commands::cmd_check(a),
        Command::Qes(a) => commands::cmd_qes(a),
        Command::Recur(a) => commands::cmd_recur(a),
        Command::Sweep(a) => commands::cmd_sweep(a),
        Command::Figures(a) => commands::cmd_figures(a),
        Command::PolyrepCheck(a) => commands::cmd_polyrep(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qjc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
