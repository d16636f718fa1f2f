//! Cost-of-pass and the frontier family built on it.
//!
//! Per cell, `R` is the observed success probability under a [`SuccessMode`]
//! and `C` the mean attempt cost; cost-of-pass is `C / R`, INFINITY when
//! `R = 0`. The frontier over a strategy set is the per-problem minimum, and
//! the dataset-level value is the plain mean of per-problem minima.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use indexmap::IndexMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::{count_ratio, ExtMoney, Money};
use crate::pricing::{attempt_cost, expert_cost, CostingError, ExpertBound, FxTable, PriceSheet};
use crate::records::{AttemptRecord, Registry, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("no attempts in cell ({strategy}, {problem})")]
    EmptyCell { strategy: String, problem: String },
    #[error("missing cell ({strategy}, {problem})")]
    MissingCell { strategy: String, problem: String },
    #[error("k = {k} exceeds the {n} attempts of cell ({strategy}, {problem})")]
    KTooLarge {
        k: u32,
        n: u32,
        strategy: String,
        problem: String,
    },
    #[error("k must be positive")]
    ZeroK,
    #[error("failure penalty must be non-negative")]
    NegativePenalty,
    #[error("no problems to aggregate over")]
    NoProblems,
    #[error("timeline needs at least one date")]
    EmptyDates,
    #[error("timeline dates must be sorted ascending")]
    UnsortedDates,
    #[error("strategy {0:?} has no price sheet")]
    MissingPriceSheet(String),
    #[error("expert strategy {strategy:?} has no profile for dataset {dataset:?}")]
    MissingExpertProfile { strategy: String, dataset: String },
    #[error("costing failed for strategy {strategy:?}: {source}")]
    Costing {
        strategy: String,
        #[source]
        source: CostingError,
    },
}

/// Success and cost estimates for one (strategy, problem) cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellStats {
    pub strategy_id: String,
    pub problem_id: String,
    pub n_attempts: u32,
    pub n_correct: u32,
    pub mean_cost: Money,
}

impl CellStats {
    pub fn success_rate(&self) -> BigRational {
        count_ratio(self.n_correct as u64, self.n_attempts as u64)
    }
}

/// What counts as a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "k")]
pub enum SuccessMode {
    #[default]
    Pass1,
    /// Any success among k attempts.
    PassAtK(u32),
    /// k consecutive successes.
    PassPowK(u32),
}

impl fmt::Display for SuccessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuccessMode::Pass1 => f.write_str("pass1"),
            SuccessMode::PassAtK(k) => write!(f, "pass@{k}"),
            SuccessMode::PassPowK(k) => write!(f, "pass^{k}"),
        }
    }
}

impl FromStr for SuccessMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "pass1" || s == "pass@1" {
            return Ok(SuccessMode::Pass1);
        }
        let parse_k = |rest: &str| rest.parse::<u32>().map_err(|_| format!("bad k in {s:?}"));
        if let Some(rest) = s.strip_prefix("pass@") {
            return Ok(SuccessMode::PassAtK(parse_k(rest)?));
        }
        if let Some(rest) = s.strip_prefix("pass^") {
            return Ok(SuccessMode::PassPowK(parse_k(rest)?));
        }
        Err(format!(
            "unknown success mode {s:?} (expected pass1, pass@k or pass^k)"
        ))
    }
}

/// Cell estimate from raw attempt records priced with `sheet`.
pub fn estimate_cell(
    records: &[&AttemptRecord],
    sheet: &PriceSheet,
) -> Result<CellStats, MetricError> {
    let first = records.first().ok_or_else(|| MetricError::EmptyCell {
        strategy: String::new(),
        problem: String::new(),
    })?;
    let mut outcomes = Vec::with_capacity(records.len());
    for r in records {
        let cost = attempt_cost(r, sheet).map_err(|source| MetricError::Costing {
            strategy: r.strategy_id.clone(),
            source,
        })?;
        outcomes.push(Outcome {
            correct: r.correct,
            cost,
        });
    }
    stats_from_outcomes(&first.strategy_id, &first.problem_id, &outcomes)
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// Success probability of a cell under `mode`, exact.
pub fn success_prob(stats: &CellStats, mode: SuccessMode) -> Result<BigRational, MetricError> {
    let n = stats.n_attempts;
    let c = stats.n_correct;
    if n == 0 {
        return Err(MetricError::EmptyCell {
            strategy: stats.strategy_id.clone(),
            problem: stats.problem_id.clone(),
        });
    }
    match mode {
        SuccessMode::Pass1 => Ok(stats.success_rate()),
        SuccessMode::PassPowK(0) | SuccessMode::PassAtK(0) => Err(MetricError::ZeroK),
        SuccessMode::PassPowK(k) => {
            let r = stats.success_rate();
            Ok(num_traits::pow(r, k as usize))
        }
        SuccessMode::PassAtK(k) => {
            if k > n {
                return Err(MetricError::KTooLarge {
                    k,
                    n,
                    strategy: stats.strategy_id.clone(),
                    problem: stats.problem_id.clone(),
                });
            }
            if c == 0 {
                return Ok(BigRational::zero());
            }
            if n - c < k {
                return Ok(BigRational::one());
            }
            let all_fail = BigRational::new(binomial(n - c, k), binomial(n, k));
            Ok(BigRational::one() - all_fail)
        }
    }
}

/// Expected cost of obtaining one pass: `C / R`, plus `penalty * (1/R - 1)`
/// for the expected number of failed attempts. INFINITY when `R = 0`.
pub fn cost_of_pass(
    stats: &CellStats,
    mode: SuccessMode,
    failure_penalty: &Money,
) -> Result<ExtMoney, MetricError> {
    if failure_penalty.is_negative() {
        return Err(MetricError::NegativePenalty);
    }
    let r = success_prob(stats, mode)?;
    if r.is_zero() {
        return Ok(ExtMoney::Infinite);
    }
    let base = &stats.mean_cost / &r;
    if failure_penalty.is_zero() {
        return Ok(ExtMoney::Finite(base));
    }
    let expected_failures = r.recip() - BigRational::one();
    Ok(ExtMoney::Finite(
        base + failure_penalty.scale(&expected_failures),
    ))
}

/// One attempt reduced to what the metrics need.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub correct: bool,
    pub cost: Money,
}

fn stats_from_outcomes(
    strategy: &str,
    problem: &str,
    outcomes: &[Outcome],
) -> Result<CellStats, MetricError> {
    if outcomes.is_empty() {
        return Err(MetricError::EmptyCell {
            strategy: strategy.to_string(),
            problem: problem.to_string(),
        });
    }
    let n = outcomes.len() as u32;
    let c = outcomes.iter().filter(|o| o.correct).count() as u32;
    let total: Money = outcomes.iter().map(|o| &o.cost).sum();
    Ok(CellStats {
        strategy_id: strategy.to_string(),
        problem_id: problem.to_string(),
        n_attempts: n,
        n_correct: c,
        mean_cost: &total / &BigRational::from_integer(BigInt::from(n)),
    })
}

/// Attempt outcomes of one cell. Expert cells are `fixed`: a single certain
/// pass at labor cost that resampling leaves untouched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellObservations {
    pub strategy_id: String,
    pub problem_id: String,
    pub outcomes: Vec<Outcome>,
    pub fixed: bool,
}

impl CellObservations {
    pub fn stats(&self) -> Result<CellStats, MetricError> {
        stats_from_outcomes(&self.strategy_id, &self.problem_id, &self.outcomes)
    }
}

/// Options for turning registry records into per-cell observations.
#[derive(Debug, Clone)]
pub struct TableOptions {
    pub currency: String,
    pub expert_bound: ExpertBound,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            currency: "USD".to_string(),
            expert_bound: ExpertBound::High,
        }
    }
}

/// Attempt outcomes for every cell of one dataset, costed in one currency.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationTable {
    pub cells: BTreeMap<(String, String), CellObservations>,
}

impl ObservationTable {
    pub fn insert(&mut self, cell: CellObservations) {
        self.cells
            .insert((cell.strategy_id.clone(), cell.problem_id.clone()), cell);
    }

    /// Gathers observations for `strategies` over every problem of `dataset_id`.
    /// Cells without attempts are left out and surface later as missing.
    pub fn from_registry(
        reg: &Registry,
        dataset_id: &str,
        strategies: &[&Strategy],
        options: &TableOptions,
    ) -> Result<ObservationTable, MetricError> {
        let fx = FxTable::new(reg.fx_rates.clone());
        let problems = reg.dataset_problems(dataset_id);
        let mut table = ObservationTable::default();
        for s in strategies {
            let costing = |source| MetricError::Costing {
                strategy: s.id.clone(),
                source,
            };
            if s.is_expert() {
                let profile = reg.expert_profile_for(&s.id, dataset_id).ok_or_else(|| {
                    MetricError::MissingExpertProfile {
                        strategy: s.id.clone(),
                        dataset: dataset_id.to_string(),
                    }
                })?;
                let cost = fx
                    .convert(
                        &expert_cost(profile, options.expert_bound),
                        &profile.currency,
                        &options.currency,
                    )
                    .map_err(costing)?;
                for p in &problems {
                    table.insert(CellObservations {
                        strategy_id: s.id.clone(),
                        problem_id: p.problem_id.clone(),
                        outcomes: vec![Outcome {
                            correct: true,
                            cost: cost.clone(),
                        }],
                        fixed: true,
                    });
                }
                continue;
            }
            let sheet = s
                .price_sheet_id
                .as_ref()
                .and_then(|id| reg.price_sheets.get(id))
                .ok_or_else(|| MetricError::MissingPriceSheet(s.id.clone()))?;
            for p in &problems {
                let records = reg.cell_attempts(&s.id, dataset_id, &p.problem_id);
                if records.is_empty() {
                    continue;
                }
                let mut outcomes = Vec::with_capacity(records.len());
                for r in records {
                    let cost = attempt_cost(r, sheet).map_err(costing)?;
                    let cost = fx
                        .convert(&cost, &sheet.currency, &options.currency)
                        .map_err(costing)?;
                    outcomes.push(Outcome {
                        correct: r.correct,
                        cost,
                    });
                }
                table.insert(CellObservations {
                    strategy_id: s.id.clone(),
                    problem_id: p.problem_id.clone(),
                    outcomes,
                    fixed: false,
                });
            }
        }
        Ok(table)
    }

    pub fn stats(&self) -> Result<StatsTable, MetricError> {
        let mut out = StatsTable::default();
        for cell in self.cells.values() {
            out.insert(cell.stats()?);
        }
        Ok(out)
    }
}

/// Cell statistics keyed by (strategy, problem).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatsTable {
    cells: HashMap<(String, String), CellStats>,
}

impl StatsTable {
    pub fn insert(&mut self, stats: CellStats) {
        self.cells
            .insert((stats.strategy_id.clone(), stats.problem_id.clone()), stats);
    }

    pub fn get(&self, strategy: &str, problem: &str) -> Option<&CellStats> {
        self.cells.get(&(strategy.to_string(), problem.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &CellStats> {
        self.cells.values()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl FromIterator<CellStats> for StatsTable {
    fn from_iter<T: IntoIterator<Item = CellStats>>(iter: T) -> Self {
        let mut t = StatsTable::default();
        for s in iter {
            t.insert(s);
        }
        t
    }
}

/// Frontier over a strategy set on a problem distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrontierResult {
    /// Mean of the per-problem values, INFINITY-absorbing.
    pub value: ExtMoney,
    /// Winning strategy per problem; absent only for an empty strategy set.
    pub argmin_by_problem: IndexMap<String, String>,
    pub per_problem_values: IndexMap<String, ExtMoney>,
}

/// Per-problem and aggregate reduction from adding strategies to a base set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GainResult {
    pub per_problem: IndexMap<String, ExtMoney>,
    pub aggregate: ExtMoney,
    pub base: FrontierResult,
    pub combined: FrontierResult,
}

/// Cost-of-pass for every cell of a [`StatsTable`] under one success mode and
/// penalty, with the frontier operations on top.
#[derive(Debug, Clone)]
pub struct Evaluator {
    values: HashMap<(String, String), ExtMoney>,
    mode: SuccessMode,
}

impl Evaluator {
    pub fn new(
        table: &StatsTable,
        mode: SuccessMode,
        failure_penalty: &Money,
    ) -> Result<Evaluator, MetricError> {
        if failure_penalty.is_negative() {
            return Err(MetricError::NegativePenalty);
        }
        let mut values = HashMap::with_capacity(table.len());
        for s in table.iter() {
            values.insert(
                (s.strategy_id.clone(), s.problem_id.clone()),
                cost_of_pass(s, mode, failure_penalty)?,
            );
        }
        Ok(Evaluator { values, mode })
    }

    /// Pass-1 evaluator with no failure penalty.
    pub fn pass1(table: &StatsTable) -> Result<Evaluator, MetricError> {
        Evaluator::new(table, SuccessMode::Pass1, &Money::zero())
    }

    pub fn mode(&self) -> SuccessMode {
        self.mode
    }

    pub fn cost_of_pass(&self, strategy: &str, problem: &str) -> Result<&ExtMoney, MetricError> {
        self.values
            .get(&(strategy.to_string(), problem.to_string()))
            .ok_or_else(|| MetricError::MissingCell {
                strategy: strategy.to_string(),
                problem: problem.to_string(),
            })
    }

    /// Per-problem minimum over `strategies`. Ties go to the earlier release
    /// date, then the lexicographically smaller id.
    pub fn frontier(
        &self,
        problems: &[&str],
        strategies: &[&Strategy],
    ) -> Result<FrontierResult, MetricError> {
        if problems.is_empty() {
            return Err(MetricError::NoProblems);
        }
        let mut per_problem_values = IndexMap::with_capacity(problems.len());
        let mut argmin_by_problem = IndexMap::with_capacity(problems.len());
        for &p in problems {
            let mut best: Option<(&ExtMoney, &Strategy)> = None;
            for &s in strategies {
                let v = self.cost_of_pass(&s.id, p)?;
                let better = match best {
                    None => true,
                    Some((bv, bs)) => {
                        (v, s.release_date, s.id.as_str()) < (bv, bs.release_date, bs.id.as_str())
                    }
                };
                if better {
                    best = Some((v, s));
                }
            }
            match best {
                Some((v, s)) => {
                    per_problem_values.insert(p.to_string(), v.clone());
                    argmin_by_problem.insert(p.to_string(), s.id.clone());
                }
                None => {
                    per_problem_values.insert(p.to_string(), ExtMoney::Infinite);
                }
            }
        }
        let value = ExtMoney::mean(per_problem_values.values()).expect("non-empty problem set");
        Ok(FrontierResult {
            value,
            argmin_by_problem,
            per_problem_values,
        })
    }

    /// Frontier reduction from adding `new` to `base`, per problem and on
    /// average.
    pub fn gain(
        &self,
        new: &[&Strategy],
        base: &[&Strategy],
        problems: &[&str],
    ) -> Result<GainResult, MetricError> {
        let base_frontier = self.frontier(problems, base)?;
        let combined_set = union(base, new);
        let combined = self.frontier(problems, &combined_set)?;
        let mut per_problem = IndexMap::with_capacity(problems.len());
        for &p in problems {
            let before = &base_frontier.per_problem_values[p];
            let after = &combined.per_problem_values[p];
            let g = before
                .reduction_to(after)
                .expect("adding strategies never raises a frontier");
            per_problem.insert(p.to_string(), g);
        }
        let aggregate = ExtMoney::mean(per_problem.values()).expect("non-empty problem set");
        Ok(GainResult {
            per_problem,
            aggregate,
            base: base_frontier,
            combined,
        })
    }

    /// Frontier at each date over strategies released on or before it.
    /// Experts carry the epoch date and so appear at every date.
    pub fn temporal_frontier(
        &self,
        problems: &[&str],
        strategies: &[&Strategy],
        dates: &[NaiveDate],
    ) -> Result<Vec<(NaiveDate, FrontierResult)>, MetricError> {
        if dates.is_empty() {
            return Err(MetricError::EmptyDates);
        }
        if dates.windows(2).any(|w| w[0] > w[1]) {
            return Err(MetricError::UnsortedDates);
        }
        dates
            .iter()
            .map(|&t| {
                let available: Vec<&Strategy> = strategies
                    .iter()
                    .copied()
                    .filter(|s| s.release_date <= t)
                    .collect();
                Ok((t, self.frontier(problems, &available)?))
            })
            .collect()
    }
}

/// `a ∪ b` by strategy id, keeping first occurrences in order.
pub fn union<'a>(a: &[&'a Strategy], b: &[&'a Strategy]) -> Vec<&'a Strategy> {
    let mut seen = HashSet::new();
    a.iter()
        .chain(b.iter())
        .copied()
        .filter(|s| seen.insert(s.id.as_str()))
        .collect()
}

/// `a ∖ b` by strategy id.
pub fn difference<'a>(a: &[&'a Strategy], b: &[&Strategy]) -> Vec<&'a Strategy> {
    let remove: HashSet<&str> = b.iter().map(|s| s.id.as_str()).collect();
    a.iter()
        .copied()
        .filter(|s| !remove.contains(s.id.as_str()))
        .collect()
}
