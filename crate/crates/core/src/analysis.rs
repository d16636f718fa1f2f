//! Counterfactual comparisons on top of the frontier: how much worse the
//! frontier gets without a strategy set, how much a technique improves it,
//! and how much each release moved it.

use std::collections::{BTreeMap, HashSet};

use chrono::NaiveDate;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::metrics::{difference, union, Evaluator, MetricError};
use crate::money::{ExtMoney, Fraction};
use crate::records::{Family, Strategy, StrategyKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("removing {0} leaves no strategies")]
    EmptyRemainder(String),
    #[error(
        "technique strategy {strategy:?} references base {base:?}, which is not in the base set"
    )]
    DanglingBase { strategy: String, base: String },
    #[error("no strategies use technique {0:?}")]
    UnknownTechnique(String),
}

/// `1 - reduced/base` on the extended line. An INFINITY base counts as fully
/// improved unless `reduced` is INFINITY too; a zero base has nothing to
/// improve.
pub fn relative_reduction(base: &ExtMoney, reduced: &ExtMoney) -> Fraction {
    match (base, reduced) {
        (ExtMoney::Infinite, ExtMoney::Infinite) => Fraction::zero(),
        (ExtMoney::Infinite, ExtMoney::Finite(_)) => Fraction::one(),
        (ExtMoney::Finite(b), _) if b.is_zero() => Fraction::zero(),
        (ExtMoney::Finite(_), _) => {
            let ratio = reduced
                .ratio(base)
                .expect("finite non-zero divisor and finite numerator");
            Fraction(clamp_unit(BigRational::one() - ratio))
        }
    }
}

fn clamp_unit(x: BigRational) -> BigRational {
    if x < BigRational::zero() {
        BigRational::zero()
    } else if x > BigRational::one() {
        BigRational::one()
    } else {
        x
    }
}

/// What was removed in an essentialness computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Subject {
    Family(Family),
    Strategy(String),
    Expert,
}

impl std::fmt::Display for Subject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Subject::Family(fam) => write!(f, "family:{fam}"),
            Subject::Strategy(id) => write!(f, "strategy:{id}"),
            Subject::Expert => f.write_str("expert"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EssentialnessReport {
    pub subject: Subject,
    pub dataset_id: String,
    pub relative_improvement: Fraction,
    pub v_full: ExtMoney,
    pub v_without: ExtMoney,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TechniqueGainReport {
    pub technique_id: String,
    pub dataset_id: String,
    pub relative_gain: Fraction,
    pub base_set_descriptor: String,
    pub v_base: ExtMoney,
    pub v_with_technique: ExtMoney,
}

/// Strategies released on the same date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReleaseEvent {
    pub date: NaiveDate,
    pub strategy_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReleaseGain {
    pub event: ReleaseEvent,
    pub relative_gain: Fraction,
    pub v_before: ExtMoney,
    pub v_after: ExtMoney,
}

/// Essentialness of `removed` within `all`: `1 - V(all) / V(all ∖ removed)`.
pub fn essentialness(
    ev: &Evaluator,
    subject: Subject,
    dataset_id: &str,
    problems: &[&str],
    removed: &[&Strategy],
    all: &[&Strategy],
) -> Result<EssentialnessReport, AnalysisError> {
    let without = difference(all, removed);
    if without.is_empty() {
        return Err(AnalysisError::EmptyRemainder(subject.to_string()));
    }
    let v_full = ev.frontier(problems, all)?.value;
    let v_without = ev.frontier(problems, &without)?.value;
    Ok(EssentialnessReport {
        subject,
        dataset_id: dataset_id.to_string(),
        relative_improvement: relative_reduction(&v_without, &v_full),
        v_full,
        v_without,
    })
}

pub fn family_essentialness(
    ev: &Evaluator,
    dataset_id: &str,
    problems: &[&str],
    family: Family,
    all: &[&Strategy],
) -> Result<EssentialnessReport, AnalysisError> {
    let members: Vec<&Strategy> = all.iter().copied().filter(|s| s.family == family).collect();
    essentialness(
        ev,
        Subject::Family(family),
        dataset_id,
        problems,
        &members,
        all,
    )
}

pub fn single_model_essentialness(
    ev: &Evaluator,
    dataset_id: &str,
    problems: &[&str],
    strategy: &Strategy,
    all: &[&Strategy],
) -> Result<EssentialnessReport, AnalysisError> {
    essentialness(
        ev,
        Subject::Strategy(strategy.id.clone()),
        dataset_id,
        problems,
        &[strategy],
        all,
    )
}

/// Essentialness of the expert against LM strategies alone. An empty LM set
/// leaves an all-INFINITY remainder, which makes the expert fully essential.
pub fn expert_essentialness(
    ev: &Evaluator,
    dataset_id: &str,
    problems: &[&str],
    lms: &[&Strategy],
    expert: &Strategy,
) -> Result<EssentialnessReport, AnalysisError> {
    let full = union(lms, &[expert]);
    let v_full = ev.frontier(problems, &full)?.value;
    let v_without = ev.frontier(problems, lms)?.value;
    Ok(EssentialnessReport {
        subject: Subject::Expert,
        dataset_id: dataset_id.to_string(),
        relative_improvement: relative_reduction(&v_without, &v_full),
        v_full,
        v_without,
    })
}

/// Relative frontier reduction from adding `modified` to `base`.
pub fn technique_gain(
    ev: &Evaluator,
    dataset_id: &str,
    problems: &[&str],
    technique_id: &str,
    base: &[&Strategy],
    modified: &[&Strategy],
) -> Result<TechniqueGainReport, AnalysisError> {
    let base_ids: HashSet<&str> = base.iter().map(|s| s.id.as_str()).collect();
    for m in modified {
        match &m.base_strategy_id {
            Some(b) if base_ids.contains(b.as_str()) => {}
            other => {
                return Err(AnalysisError::DanglingBase {
                    strategy: m.id.clone(),
                    base: other.clone().unwrap_or_default(),
                })
            }
        }
    }
    let g = ev.gain(modified, base, problems)?;
    let v_base = g.base.value;
    let v_with = g.combined.value;
    Ok(TechniqueGainReport {
        technique_id: technique_id.to_string(),
        dataset_id: dataset_id.to_string(),
        relative_gain: relative_reduction(&v_base, &v_with),
        base_set_descriptor: base
            .iter()
            .map(|s| s.id.as_str())
            .collect::<Vec<_>>()
            .join("+"),
        v_base,
        v_with_technique: v_with,
    })
}

/// Technique strategies grouped by technique label, in first-seen order, each
/// with the base strategies they reference.
pub fn technique_groups<'a>(strategies: &[&'a Strategy]) -> Vec<(String, Vec<&'a Strategy>)> {
    let mut groups: Vec<(String, Vec<&'a Strategy>)> = Vec::new();
    for s in strategies
        .iter()
        .filter(|s| s.kind == StrategyKind::TechniqueModified)
    {
        let label = s.technique.clone().unwrap_or_else(|| s.id.clone());
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, members)) => members.push(s),
            None => groups.push((label, vec![s])),
        }
    }
    groups
}

/// Model strategies grouped by release date, ascending; ids sorted within a
/// date.
pub fn release_events(strategies: &[&Strategy]) -> Vec<ReleaseEvent> {
    let mut by_date: BTreeMap<NaiveDate, Vec<String>> = BTreeMap::new();
    for s in strategies.iter().filter(|s| s.kind == StrategyKind::Model) {
        by_date
            .entry(s.release_date)
            .or_default()
            .push(s.id.clone());
    }
    by_date
        .into_iter()
        .map(|(date, mut strategy_ids)| {
            strategy_ids.sort();
            ReleaseEvent { date, strategy_ids }
        })
        .collect()
}

/// Per release event, the relative frontier reduction over everything
/// available before it (experts included from the start).
pub fn release_relative_gain(
    ev: &Evaluator,
    problems: &[&str],
    strategies: &[&Strategy],
) -> Result<Vec<ReleaseGain>, AnalysisError> {
    let mut available: Vec<&Strategy> = strategies
        .iter()
        .copied()
        .filter(|s| s.is_expert())
        .collect();
    let mut out = Vec::new();
    for event in release_events(strategies) {
        let new: Vec<&Strategy> = strategies
            .iter()
            .copied()
            .filter(|s| event.strategy_ids.contains(&s.id))
            .collect();
        let before = ev.frontier(problems, &available)?.value;
        available = union(&available, &new);
        let after = ev.frontier(problems, &available)?.value;
        out.push(ReleaseGain {
            event,
            relative_gain: relative_reduction(&before, &after),
            v_before: before,
            v_after: after,
        });
    }
    Ok(out)
}
