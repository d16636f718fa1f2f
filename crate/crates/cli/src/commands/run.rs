use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use cost_of_pass::harness::{
    build_provider, run_cells, CellJob, CellReport, Provider, SamplingConfig,
};
use cost_of_pass::records::{AttemptRecord, Family, Strategy};

use super::Status;
use crate::context::load_registry;
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{render_table, Artifacts};

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Registry bundle directory.
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long)]
    pub dataset: String,
    /// Strategies to run (comma separated); default is every strategy with a
    /// provider.
    #[arg(long, value_delimiter = ',')]
    pub strategies: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub n_attempts: u32,
    #[arg(long, default_value_t = 0.7)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1.0)]
    pub top_p: f64,
    #[arg(long)]
    pub max_output_tokens: Option<u32>,
    /// Cells run concurrently.
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    /// Prompt template with an `{input}` slot; default is the built-in one.
    #[arg(long)]
    pub template: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn runnable<'a>(
    args: &RunArgs,
    strategies: impl Iterator<Item = &'a Strategy>,
) -> Result<Vec<&'a Strategy>, CliError> {
    let all: Vec<&Strategy> = strategies.collect();
    if let Some(bad) = args
        .strategies
        .iter()
        .find(|id| !all.iter().any(|s| s.id == **id))
    {
        return Err(CliError::Config(format!("unknown strategy {bad:?}")));
    }
    let mut out = Vec::new();
    for s in all {
        let named = args.strategies.contains(&s.id);
        if !args.strategies.is_empty() && !named {
            continue;
        }
        if s.is_expert() || s.provider_config_id.is_none() {
            if named {
                return Err(CliError::Config(format!(
                    "strategy {:?} has no provider to run",
                    s.id
                )));
            }
            continue;
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err(CliError::Config("no runnable strategies".into()));
    }
    Ok(out)
}

pub fn run(args: &RunArgs) -> Result<Status, CliError> {
    let reg = load_registry(&args.registry)?;
    let dataset = reg
        .datasets
        .get(&args.dataset)
        .ok_or_else(|| CliError::Config(format!("unknown dataset {:?}", args.dataset)))?;
    let sampling = SamplingConfig {
        n_attempts: args.n_attempts,
        temperature: args.temperature,
        top_p: Some(args.top_p),
        reasoning_mode: false,
        max_output_tokens: args.max_output_tokens,
    };
    let violations = sampling.invariant_violations();
    if !violations.is_empty() {
        return Err(CliError::Config(violations.join("; ")));
    }
    let template = match &args.template {
        Some(p) => Some(fs::read_to_string(p).map_err(CliError::io(p))?),
        None => None,
    };
    let strategies = runnable(args, reg.strategies.values())?;
    let mut providers: HashMap<&str, Box<dyn Provider>> = HashMap::new();
    for s in &strategies {
        let id = s
            .provider_config_id
            .as_deref()
            .expect("runnable strategies have providers");
        if !providers.contains_key(id) {
            let p = build_provider(&reg.providers[id])
                .map_err(|e| CliError::Config(format!("provider {id:?}: {e}")))?;
            providers.insert(id, p);
        }
    }
    let problems = reg.dataset_problems(&dataset.id);

    let mut records: Vec<AttemptRecord> = Vec::new();
    let mut reports: Vec<CellReport> = Vec::new();
    for s in &strategies {
        let provider = providers[s.provider_config_id.as_deref().unwrap()].as_ref();
        let jobs: Vec<CellJob> = problems
            .iter()
            .map(|p| CellJob {
                provider,
                strategy_id: &s.id,
                dataset,
                problem: p,
            })
            .collect();
        let cell_sampling = SamplingConfig {
            reasoning_mode: s.family == Family::Reasoning,
            ..sampling.clone()
        };
        for outcome in run_cells(
            &jobs,
            template.as_deref(),
            &cell_sampling,
            args.seed,
            args.concurrency,
        ) {
            records.extend(outcome.records);
            reports.push(outcome.report);
        }
    }

    let mut manifest = RunManifest::new("run", &args.registry, &[], &args.out)?;
    manifest.seed = Some(args.seed);
    manifest.param("dataset", &args.dataset);
    manifest.param(
        "strategies",
        strategies.iter().map(|s| &s.id).collect::<Vec<_>>(),
    );
    manifest.param("sampling", &sampling);
    manifest.param(
        "template",
        args.template.as_ref().map(|p| p.display().to_string()),
    );
    let out = Artifacts::create(&args.out, &manifest)?;
    out.jsonl(
        "attempts.jsonl",
        records.iter().map(AttemptRecord::to_jsonl_line),
    )?;
    out.jsonl(
        "run_report.jsonl",
        reports.iter().map(CellReport::to_jsonl_line),
    )?;

    let header = [
        "strategy",
        "cells",
        "attempts",
        "correct",
        "accuracy",
        "no_answer",
        "shortfall",
    ];
    let mut rows = Vec::new();
    let mut total_shortfall = 0u64;
    for s in &strategies {
        let mine: Vec<&CellReport> = reports.iter().filter(|r| r.strategy_id == s.id).collect();
        let completed: u64 = mine.iter().map(|r| r.completed as u64).sum();
        let correct: u64 = mine.iter().map(|r| r.correct as u64).sum();
        let no_answer: u64 = mine.iter().map(|r| r.extraction_failures as u64).sum();
        let shortfall: u64 = mine.iter().map(|r| r.shortfall() as u64).sum();
        total_shortfall += shortfall;
        let accuracy = if completed == 0 {
            "-".to_string()
        } else {
            format!("{:.4}", correct as f64 / completed as f64)
        };
        rows.push(vec![
            s.id.clone(),
            mine.len().to_string(),
            completed.to_string(),
            correct.to_string(),
            accuracy,
            no_answer.to_string(),
            shortfall.to_string(),
        ]);
    }
    let table = render_table(&header, &rows);
    print!("{table}");
    out.text("run_summary.txt", &table)?;

    if total_shortfall > 0 {
        eprintln!(
            "{total_shortfall} attempt(s) missing; see {}",
            out.path("run_report.jsonl").display()
        );
        return Ok(Status::Shortfall);
    }
    Ok(Status::Ok)
}
