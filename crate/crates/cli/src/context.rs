//! Loading a registry plus records, and picking strategies and datasets.

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use cost_of_pass::metrics::{Evaluator, ObservationTable, SuccessMode, TableOptions};
use cost_of_pass::pricing::ExpertBound;
use cost_of_pass::records::{validate_registry, DatasetRef, Registry, Strategy};
use cost_of_pass::Money;

use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Bound {
    Low,
    High,
}

impl From<Bound> for ExpertBound {
    fn from(b: Bound) -> Self {
        match b {
            Bound::Low => ExpertBound::Low,
            Bound::High => ExpertBound::High,
        }
    }
}

/// Inputs shared by the analysis commands.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Registry bundle directory.
    #[arg(long)]
    pub registry: PathBuf,
    /// Attempt-record JSONL files; repeat or list several.
    #[arg(long = "records", num_args = 1..)]
    pub records: Vec<PathBuf>,
    /// Dataset ids, in any order; default is every dataset in the registry.
    #[arg(long = "dataset")]
    pub datasets: Vec<String>,
    /// Restrict to these strategy ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub strategies: Vec<String>,
    /// Drop strategies flagged impractical before any frontier computation.
    #[arg(long)]
    pub exclude_impractical: bool,
    /// pass1, pass@k or pass^k.
    #[arg(long, default_value = "pass1")]
    pub mode: SuccessMode,
    /// Extra charge per failed attempt.
    #[arg(long, default_value = "0")]
    pub failure_penalty: Money,
    #[arg(long, default_value = "USD")]
    pub currency: String,
    #[arg(long, value_enum, default_value = "high")]
    pub expert_bound: Bound,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl DataArgs {
    pub fn manifest(&self, command: &str) -> Result<RunManifest, CliError> {
        let mut m = RunManifest::new(command, &self.registry, &self.records, &self.out)?;
        m.param("datasets", &self.datasets);
        m.param("strategies", &self.strategies);
        m.param("exclude_impractical", self.exclude_impractical);
        m.param("mode", self.mode.to_string());
        m.param("failure_penalty", self.failure_penalty.to_string());
        m.param("currency", &self.currency);
        m.param(
            "expert_bound",
            format!("{:?}", self.expert_bound).to_lowercase(),
        );
        Ok(m)
    }
}

/// Loads and validates a bundle.
pub fn load_registry(dir: &std::path::Path) -> Result<Registry, CliError> {
    let reg = Registry::load_bundle(dir).map_err(|e| CliError::Config(e.to_string()))?;
    let violations = validate_registry(&reg);
    if !violations.is_empty() {
        return Err(CliError::Validation(
            violations.iter().map(ToString::to_string).collect(),
        ));
    }
    Ok(reg)
}

pub fn ingest_files(reg: &mut Registry, files: &[PathBuf]) -> Result<usize, CliError> {
    let mut total = 0;
    for path in files {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let report = reg.ingest_attempts(&text);
        if !report.errors.is_empty() {
            return Err(CliError::Ingest {
                path: path.display().to_string(),
                errors: report.errors.iter().map(ToString::to_string).collect(),
            });
        }
        total += report.accepted;
    }
    Ok(total)
}

pub struct Workspace {
    pub reg: Registry,
    pub args: DataArgs,
}

impl Workspace {
    pub fn load(args: &DataArgs) -> Result<Workspace, CliError> {
        let mut reg = load_registry(&args.registry)?;
        ingest_files(&mut reg, &args.records)?;
        Ok(Workspace {
            reg,
            args: args.clone(),
        })
    }

    /// Requested datasets in registry order.
    pub fn datasets(&self) -> Result<Vec<&DatasetRef>, CliError> {
        if let Some(bad) = self
            .args
            .datasets
            .iter()
            .find(|d| !self.reg.datasets.contains_key(*d))
        {
            return Err(CliError::Config(format!("unknown dataset {bad:?}")));
        }
        Ok(self
            .reg
            .datasets
            .values()
            .filter(|d| self.args.datasets.is_empty() || self.args.datasets.contains(&d.id))
            .collect())
    }

    /// Strategy filter and impractical exclusion, in registry order.
    pub fn selection(&self) -> Result<Vec<&Strategy>, CliError> {
        let filter = &self.args.strategies;
        if let Some(bad) = filter
            .iter()
            .find(|s| !self.reg.strategies.contains_key(*s))
        {
            return Err(CliError::Config(format!("unknown strategy {bad:?}")));
        }
        Ok(self
            .reg
            .strategies
            .values()
            .filter(|s| filter.is_empty() || filter.contains(&s.id))
            .filter(|s| !(self.args.exclude_impractical && s.impractical))
            .collect())
    }

    /// The selection, narrowed by `keep`, restricted to what can be evaluated
    /// on `dataset`. Experts without a profile there are dropped unless named
    /// explicitly, and every model cell must have attempts.
    pub fn strategies_for(
        &self,
        dataset: &str,
        keep: impl Fn(&Strategy) -> bool,
    ) -> Result<Vec<&Strategy>, CliError> {
        let mut out = Vec::new();
        for s in self.selection()?.into_iter().filter(|s| keep(s)) {
            if s.is_expert() && self.reg.expert_profile_for(&s.id, dataset).is_none() {
                if self.args.strategies.contains(&s.id) {
                    return Err(CliError::MissingData(format!(
                        "expert {:?} has no profile for dataset {dataset:?}",
                        s.id
                    )));
                }
                continue;
            }
            out.push(s);
        }
        self.check_cells(dataset, &out)?;
        Ok(out)
    }

    pub fn problems(&self, dataset: &str) -> Result<Vec<&str>, CliError> {
        let problems: Vec<&str> = self
            .reg
            .dataset_problems(dataset)
            .into_iter()
            .map(|p| p.problem_id.as_str())
            .collect();
        if problems.is_empty() {
            return Err(CliError::MissingData(format!(
                "dataset {dataset:?} has no problems"
            )));
        }
        Ok(problems)
    }

    fn check_cells(&self, dataset: &str, strategies: &[&Strategy]) -> Result<(), CliError> {
        let mut pairs = Vec::new();
        for s in strategies.iter().filter(|s| !s.is_expert()) {
            for p in self.reg.dataset_problems(dataset) {
                if self
                    .reg
                    .cell_attempts(&s.id, dataset, &p.problem_id)
                    .is_empty()
                {
                    pairs.push((s.id.clone(), p.problem_id.clone()));
                }
            }
        }
        if pairs.is_empty() {
            Ok(())
        } else {
            Err(CliError::MissingCells {
                dataset: dataset.to_string(),
                pairs,
            })
        }
    }

    pub fn table_options(&self) -> TableOptions {
        TableOptions {
            currency: self.args.currency.clone(),
            expert_bound: self.args.expert_bound.into(),
        }
    }

    pub fn observations(
        &self,
        dataset: &str,
        strategies: &[&Strategy],
    ) -> Result<ObservationTable, CliError> {
        Ok(ObservationTable::from_registry(
            &self.reg,
            dataset,
            strategies,
            &self.table_options(),
        )?)
    }

    pub fn evaluator(
        &self,
        dataset: &str,
        strategies: &[&Strategy],
    ) -> Result<Evaluator, CliError> {
        let stats = self.observations(dataset, strategies)?.stats()?;
        Ok(Evaluator::new(
            &stats,
            self.args.mode,
            &self.args.failure_penalty,
        )?)
    }
}
