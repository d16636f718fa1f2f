//! Brute-force reference computations and a seeded synthetic ecosystem.
//!
//! Values are `Option<BigRational>` with `None` for an infeasible
//! (infinite) cost. Cost-of-pass is computed as total cost over the number
//! of correct attempts, which is algebraically C/R but shares no code with
//! the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use cost_of_pass::metrics::{ObservationTable, TableOptions};
use cost_of_pass::pricing::{ExpertProfile, PriceSheet};
use cost_of_pass::records::{
    AttemptRecord, DatasetRef, Family, GraderKind, ProblemInstance, Registry, Strategy,
    TaskCategory,
};
use cost_of_pass::{ExtMoney, Money};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Q = BigRational;
pub type V = Option<Q>;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn ext_eq(lib: &ExtMoney, oracle: &V) -> bool {
    match (lib, oracle) {
        (ExtMoney::Infinite, None) => true,
        (ExtMoney::Finite(m), Some(x)) => m.as_rational() == x,
        _ => false,
    }
}

pub fn show(v: &V) -> String {
    match v {
        None => "inf".into(),
        Some(x) => x.to_string(),
    }
}

/// `a < b` with None as +infinity.
fn less(a: &V, b: &V) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Per-problem cost-of-pass values, keyed by (strategy, problem).
#[derive(Debug, Clone, Default)]
pub struct Oracle {
    pub cop: HashMap<(String, String), V>,
}

impl Oracle {
    /// Builds from raw (correct, cost) attempts per cell.
    pub fn from_attempts(cells: &HashMap<(String, String), Vec<(bool, Q)>>) -> Oracle {
        let mut cop = HashMap::new();
        for (key, attempts) in cells {
            let correct = attempts.iter().filter(|a| a.0).count() as i64;
            let total: Q = attempts.iter().fold(Q::zero(), |acc, a| acc + &a.1);
            let v = if correct == 0 {
                None
            } else {
                Some(total / Q::from_integer(BigInt::from(correct)))
            };
            cop.insert(key.clone(), v);
        }
        Oracle { cop }
    }

    pub fn value(&self, s: &str, p: &str) -> V {
        self.cop[&(s.to_string(), p.to_string())].clone()
    }

    /// Per-problem minimum by scanning every strategy.
    pub fn per_problem(&self, set: &[&str], problems: &[&str]) -> Vec<V> {
        problems
            .iter()
            .map(|p| {
                let mut best: V = None;
                for s in set {
                    let v = self.value(s, p);
                    if less(&v, &best) {
                        best = v;
                    }
                }
                best
            })
            .collect()
    }

    pub fn frontier(&self, set: &[&str], problems: &[&str]) -> V {
        mean(&self.per_problem(set, problems))
    }

    pub fn gain(&self, new: &[&str], base: &[&str], problems: &[&str]) -> V {
        let mut both: Vec<&str> = base.to_vec();
        for s in new {
            if !both.contains(s) {
                both.push(s);
            }
        }
        let before = self.per_problem(base, problems);
        let after = self.per_problem(&both, problems);
        let diffs: Vec<V> = before
            .iter()
            .zip(&after)
            .map(|(b, a)| match (b, a) {
                (None, None) => Some(Q::zero()),
                (None, Some(_)) => None,
                (Some(x), Some(y)) => Some(x - y),
                (Some(_), None) => panic!("frontier rose after adding strategies"),
            })
            .collect();
        mean(&diffs)
    }

    pub fn essentialness(&self, removed: &[&str], all: &[&str], problems: &[&str]) -> Q {
        let without: Vec<&str> = all
            .iter()
            .copied()
            .filter(|s| !removed.contains(s))
            .collect();
        relative(
            &self.frontier(&without, problems),
            &self.frontier(all, problems),
        )
    }

    pub fn technique(&self, base: &[&str], modified: &[&str], problems: &[&str]) -> Q {
        let mut both = base.to_vec();
        both.extend_from_slice(modified);
        relative(
            &self.frontier(base, problems),
            &self.frontier(&both, problems),
        )
    }
}

pub fn mean(values: &[V]) -> V {
    let mut total = Q::zero();
    for v in values {
        total += v.as_ref()?;
    }
    Some(total / Q::from_integer(BigInt::from(values.len())))
}

/// `1 - reduced/base` with the infinite-base conventions.
pub fn relative(base: &V, reduced: &V) -> Q {
    match (base, reduced) {
        (None, None) => Q::zero(),
        (None, Some(_)) => Q::one(),
        (Some(b), _) if b.is_zero() => Q::zero(),
        (Some(_), None) => panic!("reduced value above base"),
        (Some(b), Some(r)) => Q::one() - r / b,
    }
}

/// A random registry plus the raw data the oracle needs.
pub struct Ecosystem {
    pub registry: Registry,
    pub dataset: String,
    pub problems: Vec<String>,
    /// Expert first, then models, then technique variants.
    pub strategies: Vec<Strategy>,
    pub oracle: Oracle,
}

impl Ecosystem {
    pub fn problem_refs(&self) -> Vec<&str> {
        self.problems.iter().map(String::as_str).collect()
    }

    pub fn strategy_refs(&self) -> Vec<&Strategy> {
        self.strategies.iter().collect()
    }

    pub fn observations(&self) -> ObservationTable {
        let refs = self.strategy_refs();
        ObservationTable::from_registry(
            &self.registry,
            &self.dataset,
            &refs,
            &TableOptions::default(),
        )
        .expect("observations build")
    }
}

const DATES: [(i32, u32, u32); 4] = [(2024, 5, 13), (2024, 7, 18), (2024, 9, 12), (2024, 12, 5)];

fn pick_family(rng: &mut ChaCha8Rng) -> Family {
    [Family::Lightweight, Family::Large, Family::Reasoning][rng.random_range(0..3)]
}

/// Up to 6 strategies (expert included), up to 20 problems, 8 attempts per
/// model cell.
pub fn ecosystem(seed: u64) -> Ecosystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dataset = "synthetic".to_string();
    let mut reg = Registry::new();
    reg.add_dataset(DatasetRef {
        id: dataset.clone(),
        task_category: TaskCategory::Other,
        grader_kind: GraderKind::Numeric,
        option_count: None,
        numeric_tolerance: None,
    })
    .unwrap();
    let n_problems = rng.random_range(1..=20);
    let problems: Vec<String> = (0..n_problems).map(|i| format!("p{i:02}")).collect();
    for p in &problems {
        reg.add_problem(ProblemInstance {
            dataset_id: dataset.clone(),
            problem_id: p.clone(),
            input_text: format!("question {p}"),
            reference_answer: "1".into(),
        })
        .unwrap();
    }

    let mut raw: HashMap<(String, String), Vec<(bool, Q)>> = HashMap::new();

    let expert = Strategy::expert("expert");
    let rate = rng.random_range(10..=120i64);
    let minutes = rng.random_range(1..=40i64);
    reg.add_expert_profile(ExpertProfile {
        id: "expert-profile".into(),
        strategy_id: "expert".into(),
        dataset_id: dataset.clone(),
        currency: "USD".into(),
        hourly_rate_low: Money::from_integer(rate),
        hourly_rate_high: Money::from_integer(rate),
        minutes_per_problem: Money::from_integer(minutes),
        region_label: String::new(),
    })
    .unwrap();
    for p in &problems {
        raw.insert(
            ("expert".into(), p.clone()),
            vec![(true, q(rate * minutes, 60))],
        );
    }
    reg.add_strategy(expert.clone()).unwrap();
    let mut strategies = vec![expert];

    let n_models = rng.random_range(1..=4);
    let with_technique = rng.random_bool(0.5);
    for i in 0..n_models {
        let (y, m, d) = DATES[rng.random_range(0..DATES.len())];
        let mut s = Strategy::model(
            &format!("m{i}"),
            pick_family(&mut rng),
            NaiveDate::from_ymd_opt(y, m, d).unwrap(),
        );
        s.price_sheet_id = Some(format!("sheet-m{i}"));
        strategies.push(s);
    }
    if with_technique {
        let base = strategies[1].clone();
        strategies.push(Strategy::technique_of("m0+tech", &base, "tech"));
    }

    for s in strategies.iter().skip(1) {
        let sheet_id = s.price_sheet_id.clone().unwrap();
        if !reg.price_sheets.contains_key(&sheet_id) {
            // cents per million tokens
            let pin = rng.random_range(1..=2000i64);
            let pout = rng.random_range(1..=8000i64);
            reg.add_price_sheet(PriceSheet::per_million(
                &sheet_id,
                "USD",
                &q(pin, 100).to_string(),
                &q(pout, 100).to_string(),
            ))
            .unwrap();
        }
        let sheet = &reg.price_sheets[&sheet_id];
        let pin = sheet.input_price_per_million_tokens.as_rational().clone();
        let pout = sheet.output_price_per_million_tokens.as_rational().clone();
        reg.add_strategy(s.clone()).unwrap();
        for p in &problems {
            let success = if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.05..=1.0)
            };
            let mut cell = Vec::new();
            for k in 0..8u32 {
                let correct = rng.random_bool(success);
                let input = rng.random_range(10..=3000u64);
                let output = rng.random_range(1..=6000u64);
                let cost = (Q::from_integer(input.into()) * &pin
                    + Q::from_integer(output.into()) * &pout)
                    / Q::from_integer(1_000_000.into());
                cell.push((correct, cost));
                reg.push_attempt(AttemptRecord {
                    strategy_id: s.id.clone(),
                    dataset_id: dataset.clone(),
                    problem_id: p.clone(),
                    attempt_index: k,
                    correct,
                    input_tokens: input,
                    output_tokens: output,
                    extra_resources: None,
                    cost_override: None,
                    wall_time_ms: None,
                })
                .unwrap();
            }
            raw.insert((s.id.clone(), p.clone()), cell);
        }
    }

    Ecosystem {
        registry: reg,
        dataset,
        problems,
        strategies,
        oracle: Oracle::from_attempts(&raw),
    }
}

/// Sorted distinct release dates of the models.
pub fn release_dates(strategies: &[Strategy]) -> Vec<NaiveDate> {
    let mut dates: Vec<NaiveDate> = strategies
        .iter()
        .filter(|s| !s.is_expert())
        .map(|s| s.release_date)
        .collect();
    dates.sort();
    dates.dedup();
    dates
}

/// Models grouped by release date, for stepwise release gains.
pub fn release_groups(strategies: &[Strategy]) -> BTreeMap<NaiveDate, Vec<String>> {
    let mut out: BTreeMap<NaiveDate, Vec<String>> = BTreeMap::new();
    for s in strategies
        .iter()
        .filter(|s| s.kind == cost_of_pass::records::StrategyKind::Model)
    {
        out.entry(s.release_date).or_default().push(s.id.clone());
    }
    out
}
