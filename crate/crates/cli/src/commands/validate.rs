use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use super::Status;
use crate::context::{ingest_files, load_registry};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::Artifacts;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Registry bundle directory.
    #[arg(long)]
    pub registry: PathBuf,
    /// Attempt-record JSONL files to check against the registry.
    #[arg(long = "records", num_args = 1..)]
    pub records: Vec<PathBuf>,
    /// Write a manifest and summary here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Summary {
    datasets: usize,
    problems: usize,
    strategies: usize,
    price_sheets: usize,
    expert_profiles: usize,
    providers: usize,
    attempts: usize,
}

pub fn run(args: &ValidateArgs) -> Result<Status, CliError> {
    let mut reg = load_registry(&args.registry)?;
    let attempts = ingest_files(&mut reg, &args.records)?;
    let summary = Summary {
        datasets: reg.datasets.len(),
        problems: reg.problems.len(),
        strategies: reg.strategies.len(),
        price_sheets: reg.price_sheets.len(),
        expert_profiles: reg.expert_profiles.len(),
        providers: reg.providers.len(),
        attempts,
    };
    println!(
        "ok: {} datasets, {} problems, {} strategies, {} attempts",
        summary.datasets, summary.problems, summary.strategies, summary.attempts
    );
    if let Some(out) = &args.out {
        let manifest = RunManifest::new("validate", &args.registry, &args.records, out)?;
        Artifacts::create(out, &manifest)?.json("validation.json", &summary)?;
    }
    Ok(Status::Ok)
}
