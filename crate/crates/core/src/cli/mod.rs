//! Command-line front end: `twophase <command> [--config PATH] [--out DIR]
//! [--resolution N] [--quiet]`.
//!
//! Exit codes: [`EXIT_OK`], [`EXIT_USAGE`] (bad arguments or configuration),
//! [`EXIT_NUMERICAL`] (a solver or I/O failure), [`EXIT_CHECK_FAILED`]
//! (`transform-check` exceeded its budget).

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{converge, elliptic, moving_planes, simulate, transform, Outcome};
pub use config::{
    AnalysisSpec, AutoKeyword, Config, GridSpec, HalfWidth, OutputSpec, Physics, ShapeSpec, TimeSpec, Tolerances,
};
pub use output::{fmt_float, round_float, round_json, write_json, Cell, CsvWriter, Header, FLOAT_DIGITS};

use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "twophase", version, about = "Two-phase heat conductor simulations and symmetry checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration; every key has a default, so this is optional.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Cells per axis (overrides `grid.n`).
    #[arg(long, global = true, value_name = "N")]
    pub resolution: Option<usize>,
    /// Only print errors and warnings.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Time-dependent solve; interface traces and their deviation from constancy.
    Simulate,
    /// Transmission solve for the time transform; interface values and residuals.
    Elliptic,
    /// Compare the transformed parabolic run with the elliptic solve.
    TransformCheck,
    /// Critical planes, ball-likeness and the value/Hopf/corner diagnostics.
    MovingPlanes,
    /// Observed convergence orders.
    Converge,
}

/// Exit code for a library error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) | Error::InvalidShape(_) | Error::InvalidScenario(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Runs a command on a resolved configuration.
pub fn execute(command: Command, config: &Config) -> crate::Result<Outcome> {
    match command {
        Command::Simulate => simulate(config),
        Command::Elliptic => elliptic(config),
        Command::TransformCheck => transform(config),
        Command::MovingPlanes => moving_planes(config),
        Command::Converge => converge(config),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match cli.config.as_deref().map_or_else(|| Ok(Config::default()), Config::from_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let config = match config.with_overrides(cli.resolution, cli.out.clone()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    for w in config.warnings() {
        eprintln!("warning: {w}");
    }
    match execute(cli.command, &config) {
        Ok(outcome) => {
            if !cli.quiet {
                println!("{}", outcome.summary);
                for f in &outcome.files {
                    println!("  wrote {}", f.display());
                }
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
