//! Percentile bootstrap over attempt outcomes.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{self, AnalysisError, Subject};
use crate::metrics::{CellObservations, Evaluator, MetricError, ObservationTable, SuccessMode};
use crate::money::{parse_rational, ExtMoney, Money};
use crate::records::Strategy;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BootstrapError {
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    Level(f64),
    #[error("need at least one resample")]
    NoResamples,
    #[error("cell ({strategy}, {problem}) has no attempts")]
    EmptyCell { strategy: String, problem: String },
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// The aggregate statistics a CI can be requested for. Sets are strategy ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "statistic", rename_all = "snake_case")]
pub enum Statistic {
    Frontier {
        strategies: Vec<String>,
    },
    Gain {
        new: Vec<String>,
        base: Vec<String>,
    },
    Essentialness {
        removed: Vec<String>,
        all: Vec<String>,
    },
    TechniqueGain {
        base: Vec<String>,
        modified: Vec<String>,
    },
}

impl Statistic {
    pub fn label(&self) -> String {
        let join = |v: &[String]| v.join("+");
        match self {
            Statistic::Frontier { strategies } => format!("frontier[{}]", join(strategies)),
            Statistic::Gain { new, base } => format!("gain[{} over {}]", join(new), join(base)),
            Statistic::Essentialness { removed, all } => {
                format!("essentialness[{} in {}]", join(removed), join(all))
            }
            Statistic::TechniqueGain { base, modified } => {
                format!("technique_gain[{} over {}]", join(modified), join(base))
            }
        }
    }

    /// True for statistics reported as fractions rather than money.
    pub fn is_relative(&self) -> bool {
        matches!(
            self,
            Statistic::Essentialness { .. } | Statistic::TechniqueGain { .. }
        )
    }

    /// Evaluates the statistic; relative statistics come back as finite
    /// values in [0, 1].
    pub fn evaluate(
        &self,
        ev: &Evaluator,
        problems: &[&str],
        lookup: &HashMap<&str, &Strategy>,
    ) -> Result<ExtMoney, BootstrapError> {
        let resolve = |ids: &[String]| -> Result<Vec<&Strategy>, BootstrapError> {
            ids.iter()
                .map(|id| {
                    lookup
                        .get(id.as_str())
                        .copied()
                        .ok_or_else(|| BootstrapError::UnknownStrategy(id.clone()))
                })
                .collect()
        };
        let fraction = |f: crate::money::Fraction| ExtMoney::Finite(Money::from_rational(f.0));
        match self {
            Statistic::Frontier { strategies } => {
                Ok(ev.frontier(problems, &resolve(strategies)?)?.value)
            }
            Statistic::Gain { new, base } => Ok(ev
                .gain(&resolve(new)?, &resolve(base)?, problems)?
                .aggregate),
            Statistic::Essentialness { removed, all } => {
                let subject = Subject::Strategy(removed.join("+"));
                let r = analysis::essentialness(
                    ev,
                    subject,
                    "",
                    problems,
                    &resolve(removed)?,
                    &resolve(all)?,
                )?;
                Ok(fraction(r.relative_improvement))
            }
            Statistic::TechniqueGain { base, modified } => {
                let r = analysis::technique_gain(
                    ev,
                    "",
                    problems,
                    "",
                    &resolve(base)?,
                    &resolve(modified)?,
                )?;
                Ok(fraction(r.relative_gain))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    pub n_resamples: u32,
    pub level: f64,
    pub seed: u64,
    pub mode: SuccessMode,
    pub failure_penalty: Money,
    /// Also resample problems with replacement before resampling attempts.
    pub problem_level: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 10_000,
            level: 0.95,
            seed: 0,
            mode: SuccessMode::Pass1,
            failure_penalty: Money::zero(),
            problem_level: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapCI {
    pub statistic_label: String,
    pub level: f64,
    pub lower: ExtMoney,
    pub upper: ExtMoney,
    /// `(lower + upper) / 2`, INFINITY if either end is.
    pub midpoint: ExtMoney,
    /// The statistic on the original data.
    pub point: ExtMoney,
    pub n_resamples: u32,
    pub seed: u64,
}

impl BootstrapCI {
    pub fn width(&self) -> ExtMoney {
        match (&self.lower, &self.upper) {
            (ExtMoney::Finite(l), ExtMoney::Finite(u)) => ExtMoney::Finite(u - l),
            (ExtMoney::Infinite, ExtMoney::Infinite) => ExtMoney::zero(),
            _ => ExtMoney::Infinite,
        }
    }
}

/// Linear-interpolation percentile of sorted values at quantile `q`,
/// computed exactly.
pub fn percentile(sorted: &[ExtMoney], q: &BigRational) -> ExtMoney {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let h = q * BigRational::from_integer(BigInt::from(sorted.len() - 1));
    let lo = h.floor();
    let frac = &h - &lo;
    let i: usize = lo.to_integer().try_into().expect("index fits");
    if frac == BigRational::from_integer(0.into()) || i + 1 >= sorted.len() {
        return sorted[i].clone();
    }
    match (&sorted[i], &sorted[i + 1]) {
        (ExtMoney::Finite(a), ExtMoney::Finite(b)) => ExtMoney::Finite(a + &(b - a).scale(&frac)),
        _ => ExtMoney::Infinite,
    }
}

fn midpoint(lower: &ExtMoney, upper: &ExtMoney) -> ExtMoney {
    match (lower, upper) {
        (ExtMoney::Finite(l), ExtMoney::Finite(u)) => {
            ExtMoney::Finite(&(l + u) / &BigRational::from_integer(2.into()))
        }
        _ => ExtMoney::Infinite,
    }
}

fn resample_table(
    obs: &ObservationTable,
    problems: &[&str],
    problem_level: bool,
    rng: &mut ChaCha8Rng,
) -> (ObservationTable, Vec<String>) {
    let drawn: Vec<(String, &str)> = if problem_level {
        (0..problems.len())
            .map(|j| {
                let src = problems[rng.random_range(0..problems.len())];
                (format!("{src}#{j}"), src)
            })
            .collect()
    } else {
        problems.iter().map(|p| (p.to_string(), *p)).collect()
    };
    let mut by_problem: HashMap<&str, Vec<&CellObservations>> = HashMap::new();
    for cell in obs.cells.values() {
        by_problem
            .entry(cell.problem_id.as_str())
            .or_default()
            .push(cell);
    }
    let mut out = ObservationTable::default();
    for (new_id, src) in &drawn {
        for cell in by_problem.get(src).map(Vec::as_slice).unwrap_or_default() {
            let outcomes = if cell.fixed {
                cell.outcomes.clone()
            } else {
                let n = cell.outcomes.len();
                (0..n)
                    .map(|_| cell.outcomes[rng.random_range(0..n)].clone())
                    .collect()
            };
            out.insert(CellObservations {
                strategy_id: cell.strategy_id.clone(),
                problem_id: new_id.clone(),
                outcomes,
                fixed: cell.fixed,
            });
        }
    }
    (out, drawn.into_iter().map(|(id, _)| id).collect())
}

/// Percentile CI of `statistic` under within-cell resampling. Resample `i`
/// draws from a ChaCha8 stream keyed by `(seed, i)`, so the result does not
/// depend on scheduling.
pub fn bootstrap_ci(
    obs: &ObservationTable,
    strategies: &[&Strategy],
    problems: &[&str],
    statistic: &Statistic,
    config: &BootstrapConfig,
) -> Result<BootstrapCI, BootstrapError> {
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(BootstrapError::Level(config.level));
    }
    if config.n_resamples == 0 {
        return Err(BootstrapError::NoResamples);
    }
    if let Some(cell) = obs.cells.values().find(|c| c.outcomes.is_empty()) {
        return Err(BootstrapError::EmptyCell {
            strategy: cell.strategy_id.clone(),
            problem: cell.problem_id.clone(),
        });
    }
    let lookup: HashMap<&str, &Strategy> = strategies.iter().map(|s| (s.id.as_str(), *s)).collect();
    let evaluate =
        |table: &ObservationTable, problems: &[&str]| -> Result<ExtMoney, BootstrapError> {
            let ev = Evaluator::new(&table.stats()?, config.mode, &config.failure_penalty)?;
            statistic.evaluate(&ev, problems, &lookup)
        };
    let point = evaluate(obs, problems)?;

    let mut values = (0..config.n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let (table, ids) = resample_table(obs, problems, config.problem_level, &mut rng);
            let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
            evaluate(&table, &ids)
        })
        .collect::<Result<Vec<ExtMoney>, BootstrapError>>()?;
    values.sort();

    let level = parse_rational(&config.level.to_string())
        .map_err(|_| BootstrapError::Level(config.level))?;
    let one = BigRational::from_integer(1.into());
    let two = BigRational::from_integer(2.into());
    let tail = (&one - &level) / &two;
    let lower = percentile(&values, &tail);
    let upper = percentile(&values, &(&one - &tail));
    Ok(BootstrapCI {
        statistic_label: statistic.label(),
        level: config.level,
        midpoint: midpoint(&lower, &upper),
        lower,
        upper,
        point,
        n_resamples: config.n_resamples,
        seed: config.seed,
    })
}
