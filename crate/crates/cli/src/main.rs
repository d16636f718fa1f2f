//! `cost-of-pass`: run evaluations and compute cost-of-pass analyses.
//!
//! Exit codes: 0 success, 1 run finished with missing attempts, 2
//! configuration or validation error, 3 missing data, 4 numerical failure.

mod commands;
mod context;
mod error;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Status;
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cost-of-pass",
    version,
    about = "Cost-of-pass evaluation and frontier analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a registry bundle and optional attempt records.
    Validate(commands::validate::ValidateArgs),
    /// Sample attempts from the configured providers.
    Run(commands::run::RunArgs),
    /// Frontier cost-of-pass per strategy and dataset.
    Frontier(commands::frontier::FrontierArgs),
    /// Frontier over release dates, optionally with a decay fit.
    Timeline(commands::timeline::TimelineArgs),
    /// Relative frontier increase when families, models or experts are removed.
    Essentialness(commands::essentialness::EssentialnessArgs),
    /// Relative frontier reduction from inference-time techniques.
    Technique(commands::technique::TechniqueArgs),
    /// Percentile bootstrap interval for one statistic.
    Bootstrap(commands::bootstrap::BootstrapArgs),
}

fn dispatch(cli: &Cli) -> Result<Status, CliError> {
    match &cli.command {
        Command::Validate(a) => commands::validate::run(a),
        Command::Run(a) => commands::run::run(a),
        Command::Frontier(a) => commands::frontier::run(a),
        Command::Timeline(a) => commands::timeline::run(a),
        Command::Essentialness(a) => commands::essentialness::run(a),
        Command::Technique(a) => commands::technique::run(a),
        Command::Bootstrap(a) => commands::bootstrap::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Shortfall) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
