//! `fdl` — experiment runner for diffusion on time-periodic moving intervals.
//!
//! Subcommands take a JSON experiment configuration and an output directory,
//! run the requested computation, and write machine-readable artifacts.
//! Exit codes: 0 success, 1 configuration error, 2 bound-audit failure,
//! 3 solver non-convergence or other numerical failure.

mod commands;
mod config;
mod emit;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "fdl",
    version,
    about = "Numerical laboratory for diffusion on time-periodic moving intervals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration file and echo the resolved settings.
    Validate(RunArgs),
    /// Compute the principal periodic eigenvalue of the diffusion operator.
    Eigen(RunArgs),
    /// Compute the eigenvalue and audit it against every closed-form bound.
    Bounds(RunArgs),
    /// Sweep the eigenvalue and its bounds over a list of frequencies.
    Sweep(RunArgs),
    /// Run the reaction–diffusion dynamics and report the dichotomy verdict.
    Nonlinear(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for output artifacts (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for sweep parallelism (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Double the spatial and temporal resolution this many times.
    #[arg(long, default_value_t = 0)]
    refine: u32,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("fdl: {err}");
            ExitCode::from(err.code())
        }
    }
}
