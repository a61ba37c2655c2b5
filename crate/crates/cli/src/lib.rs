//! The `dcf` command-line tool: throughput curves, stability regions,
//! parameter sweeps and simulation runs written as CSV.

pub mod args;
pub mod commands;
pub mod output;
pub mod scenario;

use std::path::Path;

use thiserror::Error;

use args::{Cli, Command};
use scenario::{CurveGrid, Scenario, Settings, SweepGrid};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or scenario contents.
    #[error("{0}")]
    Usage(String),
    /// The demand exceeds the maximum throughput.
    #[error("{0}")]
    NoRoots(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NoRoots(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let scenario = match &cli.global.scenario {
        Some(path) => Scenario::load(path)?,
        None => Scenario::default(),
    };
    let settings = Settings::resolve(&cli.global, &scenario)?;
    let report = match &cli.command {
        Command::Curve(a) => commands::curve(&settings, &CurveGrid::resolve(a, &scenario)?)?,
        Command::Regions => commands::regions(&settings)?,
        Command::Sweep(a) => commands::sweep(&settings, &SweepGrid::resolve(a, &scenario)?)?,
        Command::Simulate(a) => commands::simulate(&settings.clone().with_sim_args(a)?)?,
        Command::Compare(a) => commands::compare(&settings.clone().with_sim_args(a)?)?,
    };
    if settings.plot.is_some() && report.plot.is_none() {
        log::warn!("--plot only applies to curve and sweep; no script written");
    }
    commands::emit(&settings, &report)
}
