//! Runs cells of attempts and reports every shortfall.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grading::{extract_answer, grade};
use super::prompt::{prompt_warnings, render_prompt};
use super::provider::{AttemptRequest, Provider};
use super::SamplingConfig;
use crate::records::{AttemptRecord, DatasetRef, ProblemInstance};

/// One attempt that produced no record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptFailure {
    pub attempt_index: u32,
    pub error: String,
}

/// Run-report line for one cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellReport {
    pub strategy_id: String,
    pub dataset_id: String,
    pub problem_id: String,
    pub requested: u32,
    pub completed: u32,
    pub correct: u32,
    /// Completed attempts with no well-formed answer block; graded incorrect.
    pub extraction_failures: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<AttemptFailure>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CellReport {
    pub fn shortfall(&self) -> u32 {
        self.requested - self.completed
    }

    pub fn to_jsonl_line(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub records: Vec<AttemptRecord>,
    pub report: CellReport,
}

/// Runs `sampling.n_attempts` attempts of one strategy on one problem.
/// Attempts the provider fails on are left out of the records and listed in
/// the report.
#[allow(clippy::too_many_arguments)]
pub fn run_cell(
    provider: &dyn Provider,
    strategy_id: &str,
    dataset: &DatasetRef,
    problem: &ProblemInstance,
    template: Option<&str>,
    sampling: &SamplingConfig,
    seed: u64,
) -> CellOutcome {
    let prompt = render_prompt(problem, template);
    let mut report = CellReport {
        strategy_id: strategy_id.to_string(),
        dataset_id: dataset.id.clone(),
        problem_id: problem.problem_id.clone(),
        requested: sampling.n_attempts,
        completed: 0,
        correct: 0,
        extraction_failures: 0,
        failures: Vec::new(),
        warnings: prompt_warnings(problem),
    };
    let mut records = Vec::with_capacity(sampling.n_attempts as usize);
    for attempt_index in 0..sampling.n_attempts {
        let request = AttemptRequest {
            strategy_id,
            dataset,
            problem,
            prompt: &prompt,
            sampling,
            seed,
            attempt_index,
        };
        let started = Instant::now();
        match provider.complete(&request) {
            Ok(c) => {
                let extracted = extract_answer(&c.text);
                if extracted.is_none() {
                    report.extraction_failures += 1;
                }
                let correct = grade(extracted.as_deref(), problem, dataset);
                report.completed += 1;
                report.correct += correct as u32;
                records.push(AttemptRecord {
                    strategy_id: strategy_id.to_string(),
                    dataset_id: dataset.id.clone(),
                    problem_id: problem.problem_id.clone(),
                    attempt_index,
                    correct,
                    input_tokens: c.input_tokens,
                    output_tokens: c.output_tokens,
                    extra_resources: None,
                    cost_override: None,
                    wall_time_ms: (!provider.is_deterministic())
                        .then(|| started.elapsed().as_millis() as u64),
                });
            }
            Err(e) => report.failures.push(AttemptFailure {
                attempt_index,
                error: e.to_string(),
            }),
        }
    }
    CellOutcome { records, report }
}

/// One unit of work for [`run_cells`].
pub struct CellJob<'a> {
    pub provider: &'a dyn Provider,
    pub strategy_id: &'a str,
    pub dataset: &'a DatasetRef,
    pub problem: &'a ProblemInstance,
}

/// Runs cells on up to `concurrency` threads; outcomes come back in job
/// order.
pub fn run_cells(
    jobs: &[CellJob<'_>],
    template: Option<&str>,
    sampling: &SamplingConfig,
    seed: u64,
    concurrency: usize,
) -> Vec<CellOutcome> {
    let run = || {
        jobs.par_iter()
            .map(|j| {
                run_cell(
                    j.provider,
                    j.strategy_id,
                    j.dataset,
                    j.problem,
                    template,
                    sampling,
                    seed,
                )
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new()
        .num_threads(concurrency.max(1))
        .build()
    {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}
