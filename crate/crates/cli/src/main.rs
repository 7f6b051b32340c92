//! `qge`: command-line driver for filtered-time-series gap estimation on the
//! open transverse-field Ising chain.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical or
//! search failure, 3 sweep finished with some failed points.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use commands::{Report, Status};
use config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qge_core::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Core(qge_core::Error::Parameter(_) | qge_core::Error::Resource { .. }) => 1,
            Self::Core(_) | Self::Output(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "qge", version, about = "Gap estimation from Trotterized, filtered time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Circuit-depth cutoffs versus time and chain length (CSV).
    DepthBound,
    /// Spectral function of one simulated time series (CSV).
    Spectrum,
    /// Gap estimate at depth M, or across --m-sweep (JSON).
    Gap,
    /// Gap estimates over uniform input orientations (JSON).
    SweepTheta,
    /// Finite-size extrapolation across J/h (JSON).
    Scaling,
    /// Peak shifts in the two-peak line-shape model (CSV).
    Toy,
    /// Print the resolved configuration as TOML.
    Config,
}

fn run(command: Command, config: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::DepthBound => commands::depth_bound(config),
        Command::Spectrum => commands::spectrum(config),
        Command::Gap => commands::gap(config),
        Command::SweepTheta => commands::sweep_theta(config),
        Command::Scaling => commands::scaling(config),
        Command::Toy => commands::toy(config),
        Command::Config => Ok(Report {
            text: toml::to_string(config).map_err(|e| CliError::Usage(e.to_string()))?,
            status: Status::Complete,
        }),
    }
}

fn emit(text: &str, out: Option<&std::path::Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // A closed reader (`qge ... | head`) is not an error.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = RunConfig::resolve(&cli.overrides).and_then(|config| {
        let report = run(cli.command, &config)?;
        emit(&report.text, cli.overrides.out.as_deref())?;
        Ok(report.status)
    });
    match result {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(status) => {
            let (what, code) = match status {
                Status::Partial => ("some sweep points failed", 3),
                _ => ("no point produced a gap estimate", 2),
            };
            eprintln!("qge: {what}; see the error fields in the output");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("qge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
