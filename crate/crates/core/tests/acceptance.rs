//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails or runs over its time budget.

mod oracle;
mod support;

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use cost_of_pass::analysis::{
    expert_essentialness, family_essentialness, release_relative_gain, single_model_essentialness,
    technique_gain,
};
use cost_of_pass::harness::{
    extract_answer, grade, render_prompt, run_cells, CellJob, HttpProvider, ProviderConfig,
    ProviderError, RandomGuesser, SamplingConfig,
};
use cost_of_pass::metrics::{
    success_prob, CellObservations, CellStats, Evaluator, ObservationTable, Outcome, StatsTable,
    SuccessMode, TableOptions,
};
use cost_of_pass::pricing::{expert_cost, ExpertBound, ExpertProfile, FxRate, FxTable, PriceSheet};
use cost_of_pass::records::{
    DatasetRef, Family, GraderKind, ProblemInstance, Registry, Strategy, TaskCategory,
};
use cost_of_pass::statistics::{bootstrap_ci, fit_decay_f64, BootstrapConfig, Statistic};
use cost_of_pass::{ExtMoney, Money};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use oracle::{ext_eq, q, show, Oracle, Q, V};
use proptest::prelude::*;
use proptest::strategy::Strategy as _;
use proptest::test_runner::{Config as ProptestConfig, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

fn profile(rate_low: &str, rate_high: &str, minutes: &str, currency: &str) -> ExpertProfile {
    ExpertProfile {
        id: "p".into(),
        strategy_id: "expert".into(),
        dataset_id: "d".into(),
        currency: currency.into(),
        hourly_rate_low: rate_low.parse().unwrap(),
        hourly_rate_high: rate_high.parse().unwrap(),
        minutes_per_problem: minutes.parse().unwrap(),
        region_label: String::new(),
    }
}

/// Rounds to `places` decimals, half away from zero.
fn round_places(m: &Money, places: usize) -> String {
    m.to_decimal_string(places)
}

fn expert_costs() -> Verdict {
    let mut lines = Vec::new();

    let gpqa = expert_cost(&profile("100", "100", "35", "USD"), ExpertBound::High);
    ensure(gpqa == Money::from_ratio(175, 3), || {
        format!("GPQA cost {gpqa}")
    })?;
    ensure(gpqa.format_significant(2) == "58", || {
        format!("GPQA {} at 2 s.f.", gpqa.format_significant(2))
    })?;
    lines.push(format!("GPQA {} -> $58", round_places(&gpqa, 2)));

    let bbq = expert_cost(&profile("15", "15", "0.4", "USD"), ExpertBound::High);
    ensure(bbq == "0.10".parse().unwrap(), || format!("BBQ {bbq}"))?;
    lines.push(format!("BBQ {bbq}"));

    let aime = expert_cost(&profile("45", "100", "12", "USD"), ExpertBound::High);
    ensure(aime == Money::from_integer(20), || format!("AIME {aime}"))?;
    lines.push(format!("AIME {aime}"));

    // high bound pairs the high rate with the 3-second end of "2-3 sec"
    let add = expert_cost(&profile("10", "20", "0.05", "USD"), ExpertBound::High);
    ensure(round_places(&add, 2) == "0.02", || {
        format!("Two-Digit high {add}")
    })?;
    lines.push(format!("Two-Digit {}", round_places(&add, 4)));

    let fx = FxTable::new(vec![FxRate {
        base: "USD".into(),
        quote: "INR".into(),
        rate: Money::from_integer(88),
    }]);
    let india = profile("3520", "4400", "35", "INR");
    let inr = expert_cost(&india, ExpertBound::High);
    ensure(round_places(&inr, 0) == "2567", || {
        format!("India GPQA INR {inr}")
    })?;
    let usd = fx.convert(&inr, "INR", "USD").map_err(|e| e.to_string())?;
    ensure(round_places(&usd, 2) == "29.17", || {
        format!("India GPQA USD {usd}")
    })?;
    let low = fx
        .convert(&expert_cost(&india, ExpertBound::Low), "INR", "USD")
        .map_err(|e| e.to_string())?;
    ensure(round_places(&low, 2) == "23.33", || {
        format!("India GPQA low USD {low}")
    })?;
    lines.push(format!(
        "India GPQA INR {} = ${}",
        round_places(&inr, 2),
        round_places(&usd, 2)
    ));
    Ok(lines.join("; "))
}

// ---------------------------------------------------------------- 2

fn mc_dataset() -> DatasetRef {
    DatasetRef {
        id: "mc4".into(),
        task_category: TaskCategory::KnowledgeBased,
        grader_kind: GraderKind::MultipleChoice,
        option_count: Some(4),
        numeric_tolerance: None,
    }
}

fn random_guesser_identity() -> Verdict {
    let d = mc_dataset();
    let mut reg = Registry::new();
    reg.add_dataset(d.clone()).unwrap();
    let problems: Vec<ProblemInstance> = (0..10)
        .map(|i| ProblemInstance {
            dataset_id: d.id.clone(),
            problem_id: format!("q{i}"),
            input_text: format!(
                "Question {i}: which option?{}\n(A) a\n(B) b\n(C) c\n(D) d",
                " filler".repeat(i)
            ),
            reference_answer: ["A", "B", "C", "D"][i % 4].into(),
        })
        .collect();
    for p in &problems {
        reg.add_problem(p.clone()).unwrap();
    }
    reg.add_price_sheet(PriceSheet::per_million("cheap", "USD", "0.15", "0.60"))
        .unwrap();
    let mut guesser = Strategy::model(
        "guesser",
        Family::Other,
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
    );
    guesser.price_sheet_id = Some("cheap".into());
    guesser.impractical = true;
    reg.add_strategy(guesser.clone()).unwrap();

    let provider = RandomGuesser::new(Some(4));
    let jobs: Vec<CellJob> = problems
        .iter()
        .map(|p| CellJob {
            provider: &provider,
            strategy_id: "guesser",
            dataset: &d,
            problem: p,
        })
        .collect();
    let sampling = SamplingConfig {
        n_attempts: 1000,
        ..SamplingConfig::default()
    };
    let outcomes = run_cells(&jobs, None, &sampling, 2025, 4);
    let mut total = 0usize;
    for o in outcomes {
        ensure(o.report.shortfall() == 0, || "guesser shortfall".into())?;
        for r in o.records {
            total += 1;
            reg.push_attempt(r).map_err(|e| e.to_string())?;
        }
    }
    ensure(total == 10_000, || format!("{total} attempts"))?;

    let obs = ObservationTable::from_registry(&reg, &d.id, &[&guesser], &TableOptions::default())
        .map_err(|e| e.to_string())?;
    let all_costs: Vec<&Money> = obs
        .cells
        .values()
        .flat_map(|c| c.outcomes.iter().map(|o| &o.cost))
        .collect();
    let mean_cost = Money::mean(all_costs).unwrap();
    let ev =
        Evaluator::pass1(&obs.stats().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = problems.iter().map(|p| p.problem_id.as_str()).collect();
    let v = ev
        .frontier(&ids, &[&guesser])
        .map_err(|e| e.to_string())?
        .value;
    let target = mean_cost.to_f64() * 4.0;
    let got = v.to_f64();
    let rel = (got - target).abs() / target;
    let accuracy = obs
        .cells
        .values()
        .flat_map(|c| &c.outcomes)
        .filter(|o| o.correct)
        .count() as f64
        / 10_000.0;
    ensure(rel < 0.05, || {
        format!(
            "v = {got:.6e}, 4C = {target:.6e}, off by {:.2}%",
            rel * 100.0
        )
    })?;
    Ok(format!(
        "accuracy {:.4}, v = {got:.4e}, 4C = {target:.4e}, rel err {:.2}%",
        accuracy,
        rel * 100.0
    ))
}

// ---------------------------------------------------------------- 3

fn oracle_equivalence() -> Verdict {
    let mut checks = 0usize;
    for seed in 0..50u64 {
        let eco = oracle::ecosystem(seed);
        let problems = eco.problem_refs();
        let strategies = eco.strategy_refs();
        let ids: Vec<&str> = strategies.iter().map(|s| s.id.as_str()).collect();
        let ev = Evaluator::pass1(&eco.observations().stats().map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let o = &eco.oracle;
        let fail = |what: &str, lib: &ExtMoney, want: &V| {
            format!("seed {seed}: {what}: library {lib}, oracle {}", show(want))
        };

        // frontier over every subset of strategies
        for mask in 1u32..(1 << strategies.len()) {
            let set: Vec<&Strategy> = (0..strategies.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| strategies[i])
                .collect();
            let set_ids: Vec<&str> = set.iter().map(|s| s.id.as_str()).collect();
            let f = ev.frontier(&problems, &set).map_err(|e| e.to_string())?;
            let want = o.frontier(&set_ids, &problems);
            ensure(ext_eq(&f.value, &want), || {
                fail("frontier", &f.value, &want)
            })?;
            let per = o.per_problem(&set_ids, &problems);
            for (i, p) in problems.iter().enumerate() {
                ensure(ext_eq(&f.per_problem_values[*p], &per[i]), || {
                    fail("per-problem", &f.per_problem_values[*p], &per[i])
                })?;
                if let Some(winner) = f.argmin_by_problem.get(*p) {
                    let wv = o.value(winner, p);
                    ensure(wv == per[i], || {
                        format!("seed {seed}: argmin {winner} misses the minimum")
                    })?;
                }
            }
            checks += 1;

            // gain of the complement over this subset
            let rest: Vec<&Strategy> = strategies
                .iter()
                .copied()
                .filter(|s| !set_ids.contains(&s.id.as_str()))
                .collect();
            if !rest.is_empty() {
                let rest_ids: Vec<&str> = rest.iter().map(|s| s.id.as_str()).collect();
                let g = ev.gain(&rest, &set, &problems).map_err(|e| e.to_string())?;
                let want = o.gain(&rest_ids, &set_ids, &problems);
                ensure(ext_eq(&g.aggregate, &want), || {
                    fail("gain", &g.aggregate, &want)
                })?;
                checks += 1;
            }
        }

        // temporal frontier
        let dates = oracle::release_dates(&eco.strategies);
        let series = ev
            .temporal_frontier(&problems, &strategies, &dates)
            .map_err(|e| e.to_string())?;
        for (t, f) in &series {
            let avail: Vec<&str> = eco
                .strategies
                .iter()
                .filter(|s| s.release_date <= *t)
                .map(|s| s.id.as_str())
                .collect();
            let want = o.frontier(&avail, &problems);
            ensure(ext_eq(&f.value, &want), || {
                fail("temporal", &f.value, &want)
            })?;
            checks += 1;
        }

        // family, single-model, expert essentialness
        for fam in [
            Family::Lightweight,
            Family::Large,
            Family::Reasoning,
            Family::Expert,
        ] {
            let members: Vec<&str> = strategies
                .iter()
                .filter(|s| s.family == fam)
                .map(|s| s.id.as_str())
                .collect();
            if members.is_empty() || members.len() == ids.len() {
                continue;
            }
            let r = family_essentialness(&ev, &eco.dataset, &problems, fam, &strategies)
                .map_err(|e| e.to_string())?;
            let want = o.essentialness(&members, &ids, &problems);
            ensure(r.relative_improvement.0 == want, || {
                format!(
                    "seed {seed}: family {fam}: {} vs {want}",
                    r.relative_improvement.0
                )
            })?;
            checks += 1;
        }
        for s in strategies.iter().skip(1) {
            let r = single_model_essentialness(&ev, &eco.dataset, &problems, s, &strategies)
                .map_err(|e| e.to_string())?;
            let want = o.essentialness(&[s.id.as_str()], &ids, &problems);
            ensure(r.relative_improvement.0 == want, || {
                format!(
                    "seed {seed}: model {}: {} vs {want}",
                    s.id, r.relative_improvement.0
                )
            })?;
            checks += 1;
        }
        let lms: Vec<&Strategy> = strategies
            .iter()
            .copied()
            .filter(|s| !s.is_expert())
            .collect();
        let r = expert_essentialness(&ev, &eco.dataset, &problems, &lms, strategies[0])
            .map_err(|e| e.to_string())?;
        let want = o.essentialness(&["expert"], &ids, &problems);
        ensure(r.relative_improvement.0 == want, || {
            format!("seed {seed}: expert {} vs {want}", r.relative_improvement.0)
        })?;
        checks += 1;

        // technique gain
        if let Some(tech) = strategies.iter().find(|s| s.technique.is_some()) {
            let base: Vec<&Strategy> = strategies
                .iter()
                .copied()
                .filter(|s| s.kind == cost_of_pass::records::StrategyKind::Model)
                .collect();
            let base_ids: Vec<&str> = base.iter().map(|s| s.id.as_str()).collect();
            let r = technique_gain(&ev, &eco.dataset, &problems, "tech", &base, &[tech])
                .map_err(|e| e.to_string())?;
            let want = o.technique(&base_ids, &[tech.id.as_str()], &problems);
            ensure(r.relative_gain.0 == want, || {
                format!("seed {seed}: technique {} vs {want}", r.relative_gain.0)
            })?;
            checks += 1;
        }

        // release gains, stepwise
        let gains =
            release_relative_gain(&ev, &problems, &strategies).map_err(|e| e.to_string())?;
        let mut avail: Vec<String> = vec!["expert".into()];
        for (g, (date, group)) in gains.iter().zip(oracle::release_groups(&eco.strategies)) {
            ensure(g.event.date == date, || format!("seed {seed}: event order"))?;
            let before: Vec<&str> = avail.iter().map(String::as_str).collect();
            let v_before = o.frontier(&before, &problems);
            avail.extend(group);
            let after: Vec<&str> = avail.iter().map(String::as_str).collect();
            let want = oracle::relative(&v_before, &o.frontier(&after, &problems));
            ensure(g.relative_gain.0 == want, || {
                format!("seed {seed}: release gain {} vs {want}", g.relative_gain.0)
            })?;
            checks += 1;
        }
    }
    Ok(format!("50 ecosystems, {checks} exact comparisons"))
}

// ---------------------------------------------------------------- 4

#[derive(Debug, Clone)]
struct Case {
    /// (n_correct of 8, cost in cents) per (model, problem)
    cells: Vec<Vec<(u32, i64)>>,
    dates: Vec<u32>,
    families: Vec<u8>,
    expert_cents: i64,
    lambda: (i64, i64),
}

fn case_strategy() -> impl proptest::strategy::Strategy<Value = Case> {
    (1usize..=5, 1usize..=8).prop_flat_map(|(models, problems)| {
        (
            prop::collection::vec(
                prop::collection::vec((0u32..=8, 1i64..=500), problems),
                models,
            ),
            prop::collection::vec(0u32..4, models),
            prop::collection::vec(0u8..3, models),
            1i64..=20_000,
            (1i64..=1000, 1i64..=100),
        )
            .prop_map(|(cells, dates, families, expert_cents, lambda)| Case {
                cells,
                dates,
                families,
                expert_cents,
                lambda,
            })
    })
}

struct Built {
    strategies: Vec<Strategy>,
    problems: Vec<String>,
    table: StatsTable,
}

fn build(case: &Case, scale: &BigRational) -> Built {
    let fams = [Family::Lightweight, Family::Large, Family::Reasoning];
    let problems: Vec<String> = (0..case.cells[0].len()).map(|i| format!("p{i}")).collect();
    let mut strategies = vec![Strategy::expert("expert")];
    let mut table = StatsTable::default();
    let cents = |c: i64| Money::from_ratio(c, 100).scale(scale);
    for p in &problems {
        table.insert(CellStats {
            strategy_id: "expert".into(),
            problem_id: p.clone(),
            n_attempts: 1,
            n_correct: 1,
            mean_cost: cents(case.expert_cents),
        });
    }
    for (i, row) in case.cells.iter().enumerate() {
        let date = NaiveDate::from_ymd_opt(2024, 1 + 3 * case.dates[i], 1).unwrap();
        let id = format!("m{i}");
        strategies.push(Strategy::model(&id, fams[case.families[i] as usize], date));
        for (p, &(c, cost)) in problems.iter().zip(row) {
            table.insert(CellStats {
                strategy_id: id.clone(),
                problem_id: p.clone(),
                n_attempts: 8,
                n_correct: c,
                mean_cost: cents(cost),
            });
        }
    }
    Built {
        strategies,
        problems,
        table,
    }
}

fn in_unit(x: &BigRational) -> bool {
    *x >= BigRational::zero() && *x <= BigRational::one()
}

fn check_case(case: &Case) -> Result<(), TestCaseError> {
    let one = BigRational::one();
    let lambda = q(case.lambda.0, case.lambda.1);
    let base = build(case, &one);
    let scaled = build(case, &lambda);
    let problems: Vec<&str> = base.problems.iter().map(String::as_str).collect();
    let all: Vec<&Strategy> = base.strategies.iter().collect();
    let ev = Evaluator::pass1(&base.table).unwrap();
    let ev_scaled = Evaluator::pass1(&scaled.table).unwrap();

    // frontier non-increasing as strategies are added, in both orders
    for order in [all.clone(), all.iter().rev().copied().collect::<Vec<_>>()] {
        let mut prev: Option<Vec<ExtMoney>> = None;
        for k in 1..=order.len() {
            let f = ev.frontier(&problems, &order[..k]).unwrap();
            let vals: Vec<ExtMoney> = f.per_problem_values.values().cloned().collect();
            if let Some(p) = &prev {
                prop_assert!(vals.iter().zip(p).all(|(now, before)| now <= before));
            }
            if order[..k].iter().any(|s| s.is_expert()) {
                prop_assert!(
                    vals.iter().all(ExtMoney::is_finite),
                    "expert-inclusive frontier must be finite"
                );
            }
            prev = Some(vals);
        }
    }

    // gain >= 0 for every single-strategy addition
    for (i, s) in all.iter().enumerate() {
        let rest: Vec<&Strategy> = all
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, s)| *s)
            .collect();
        let g = ev.gain(&[s], &rest, &problems).unwrap();
        prop_assert!(g.per_problem.values().all(|v| *v >= ExtMoney::zero()));
        prop_assert!(g.aggregate >= ExtMoney::zero());
        let models: Vec<&Strategy> = rest.iter().copied().filter(|s| !s.is_expert()).collect();
        if !models.is_empty() {
            let g = ev.gain(&[s], &models, &problems).unwrap();
            prop_assert!(g.aggregate >= ExtMoney::zero());
        }
    }

    // temporal frontier non-increasing
    let mut dates: Vec<NaiveDate> = base.strategies.iter().map(|s| s.release_date).collect();
    dates.sort();
    dates.dedup();
    let series = ev.temporal_frontier(&problems, &all, &dates).unwrap();
    prop_assert!(series.windows(2).all(|w| w[1].1.value <= w[0].1.value));

    // price scaling: values scale by lambda, argmins unchanged
    let all_scaled: Vec<&Strategy> = scaled.strategies.iter().collect();
    let models: Vec<&Strategy> = all.iter().copied().filter(|s| !s.is_expert()).collect();
    for set in [all.clone(), models.clone()] {
        let f = ev.frontier(&problems, &set).unwrap();
        let ids: Vec<&str> = set.iter().map(|s| s.id.as_str()).collect();
        let set_scaled: Vec<&Strategy> = all_scaled
            .iter()
            .copied()
            .filter(|s| ids.contains(&s.id.as_str()))
            .collect();
        let fs = ev_scaled.frontier(&problems, &set_scaled).unwrap();
        prop_assert_eq!(&f.argmin_by_problem, &fs.argmin_by_problem);
        prop_assert_eq!(f.value.scale(&lambda), fs.value);
    }
    let g = ev.gain(&models, &all[..1], &problems).unwrap();
    let gs = ev_scaled
        .gain(&all_scaled[1..], &all_scaled[..1], &problems)
        .unwrap();
    prop_assert_eq!(g.aggregate.scale(&lambda), gs.aggregate);

    // relative metrics in [0, 1]
    for s in &all {
        let r = single_model_essentialness(&ev, "d", &problems, s, &all).unwrap();
        prop_assert!(in_unit(&r.relative_improvement.0));
    }
    for fam in [Family::Lightweight, Family::Large, Family::Reasoning] {
        if let Ok(r) = family_essentialness(&ev, "d", &problems, fam, &all) {
            prop_assert!(in_unit(&r.relative_improvement.0));
        }
    }
    let r = expert_essentialness(&ev, "d", &problems, &models, all[0]).unwrap();
    prop_assert!(in_unit(&r.relative_improvement.0));
    for g in release_relative_gain(&ev, &problems, &all).unwrap() {
        prop_assert!(in_unit(&g.relative_gain.0));
    }
    if models.len() >= 2 {
        let mut modified = models[models.len() - 1].clone();
        modified.base_strategy_id = Some(models[0].id.clone());
        modified.kind = cost_of_pass::records::StrategyKind::TechniqueModified;
        let r = technique_gain(
            &ev,
            "d",
            &problems,
            "t",
            &models[..models.len() - 1],
            &[&modified],
        )
        .unwrap();
        prop_assert!(in_unit(&r.relative_gain.0));
    }
    Ok(())
}

fn monotonicity_suite() -> Verdict {
    let config = ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    };
    let mut runner = TestRunner::new_with_rng(
        config,
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    );
    let count = std::sync::atomic::AtomicUsize::new(0);
    runner
        .run(&case_strategy(), |case| {
            count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            check_case(&case)
        })
        .map_err(|e| e.to_string())?;
    let n = count.into_inner();
    ensure(n >= 1000, || format!("only {n} cases ran"))?;
    Ok(format!("{n} generated cases"))
}

// ---------------------------------------------------------------- 5

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// 24 points spanning five half-lives.
fn decay_series(half_life: f64, noise: Option<&mut ChaCha8Rng>) -> Vec<(f64, f64)> {
    let b = std::f64::consts::LN_2 / half_life;
    let n = 24;
    let span = 5.0 * half_life;
    let mut noise = noise;
    (0..n)
        .map(|i| {
            let t = span * i as f64 / (n - 1) as f64;
            let v = 10.0 * (-b * t).exp() + 1.0;
            let factor = match noise.as_deref_mut() {
                Some(rng) => 1.0 + 0.05 * gaussian(rng),
                None => 1.0,
            };
            (t, v * factor)
        })
        .collect()
}

fn fit_recovery() -> Verdict {
    let mut parts = Vec::new();
    for half_life in [2.6, 7.1] {
        let noiseless = fit_decay_f64(&decay_series(half_life, None)).map_err(|e| e.to_string())?;
        let h = noiseless
            .half_life_months
            .ok_or("noiseless fit has no half-life")?;
        ensure((h - half_life).abs() / half_life < 0.01, || {
            format!("noiseless half-life {h} vs {half_life}")
        })?;
        ensure(noiseless.residual_norm < 1e-8, || {
            format!("residual {}", noiseless.residual_norm)
        })?;

        // also the t = 0..9 monthly series
        let b = std::f64::consts::LN_2 / half_life;
        let monthly: Vec<(f64, f64)> = (0..10)
            .map(|t| (t as f64, 10.0 * (-b * t as f64).exp() + 1.0))
            .collect();
        let m = fit_decay_f64(&monthly).map_err(|e| e.to_string())?;
        let hm = m.half_life_months.ok_or("monthly fit has no half-life")?;
        ensure((hm - half_life).abs() / half_life < 0.01, || {
            format!("monthly half-life {hm} vs {half_life}")
        })?;

        let mut within = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fit = fit_decay_f64(&decay_series(half_life, Some(&mut rng)))
                .map_err(|e| e.to_string())?;
            if fit
                .half_life_months
                .is_some_and(|h| (h - half_life).abs() / half_life <= 0.15)
            {
                within += 1;
            }
        }
        ensure(within >= 90, || {
            format!("half-life {half_life}: {within}/100 noisy fits within 15%")
        })?;
        parts.push(format!(
            "T={half_life}: noiseless {h:.6}, noisy {within}/100"
        ));
    }
    Ok(parts.join("; "))
}

// ---------------------------------------------------------------- 6

fn bernoulli_obs(outcomes: &[bool], expert_cost: i64) -> ObservationTable {
    let mut obs = ObservationTable::default();
    obs.insert(CellObservations {
        strategy_id: "m".into(),
        problem_id: "p".into(),
        outcomes: outcomes
            .iter()
            .map(|&correct| Outcome {
                correct,
                cost: Money::from_integer(1),
            })
            .collect(),
        fixed: false,
    });
    obs.insert(CellObservations {
        strategy_id: "expert".into(),
        problem_id: "p".into(),
        outcomes: vec![Outcome {
            correct: true,
            cost: Money::from_integer(expert_cost),
        }],
        fixed: true,
    });
    obs
}

fn bootstrap_correctness() -> Verdict {
    let model = Strategy::model(
        "m",
        Family::Large,
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
    );
    let expert = Strategy::expert("expert");
    let strategies = [&model, &expert];
    let stat = Statistic::Frontier {
        strategies: vec!["m".into(), "expert".into()],
    };

    // determinism
    let obs = bernoulli_obs(&[true, false, true, true, true, false, true, true], 10);
    let config = BootstrapConfig {
        n_resamples: 2000,
        seed: 99,
        ..BootstrapConfig::default()
    };
    let a = bootstrap_ci(&obs, &strategies, &["p"], &stat, &config).map_err(|e| e.to_string())?;
    let b = bootstrap_ci(&obs, &strategies, &["p"], &stat, &config).map_err(|e| e.to_string())?;
    ensure(a == b, || "same seed gave different intervals".into())?;

    // degenerate data
    let flat = bernoulli_obs(&[true; 8], 10);
    let d = bootstrap_ci(&flat, &strategies, &["p"], &stat, &config).map_err(|e| e.to_string())?;
    ensure(d.lower == d.upper && d.lower == d.point, || {
        format!("degenerate CI {} .. {}", d.lower, d.upper)
    })?;

    // coverage: true frontier is min(C / 0.7, expert) = 10/7
    let truth = ExtMoney::Finite(Money::from_ratio(10, 7));
    let mut covered = 0;
    let reps = 500;
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + rep);
        let draws: Vec<bool> = (0..8).map(|_| rng.random_bool(0.7)).collect();
        let obs = bernoulli_obs(&draws, 10);
        let config = BootstrapConfig {
            n_resamples: 1000,
            seed: rep,
            ..BootstrapConfig::default()
        };
        let ci =
            bootstrap_ci(&obs, &strategies, &["p"], &stat, &config).map_err(|e| e.to_string())?;
        if ci.lower <= truth && truth <= ci.upper {
            covered += 1;
        }
    }
    let coverage = covered as f64 / reps as f64;
    ensure((0.88..=0.99).contains(&coverage), || {
        format!("coverage {coverage}")
    })?;
    Ok(format!("reproducible, zero-width on constant data, coverage {coverage:.3} over {reps} replications"))
}

// ---------------------------------------------------------------- 7

fn pass_at_k_enumeration() -> Verdict {
    let mut checked = 0;
    for n in 1u32..=12 {
        for c in 0..=n {
            for k in 1..=n {
                // attempts 0..c are the correct ones
                let (mut hits, mut total) = (0i64, 0i64);
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() != k {
                        continue;
                    }
                    total += 1;
                    if mask & ((1u32 << c) - 1) != 0 {
                        hits += 1;
                    }
                }
                let stats = CellStats {
                    strategy_id: "s".into(),
                    problem_id: "p".into(),
                    n_attempts: n,
                    n_correct: c,
                    mean_cost: Money::from_integer(1),
                };
                let got =
                    success_prob(&stats, SuccessMode::PassAtK(k)).map_err(|e| e.to_string())?;
                ensure(got == q(hits, total), || {
                    format!("n={n} c={c} k={k}: {got} vs {hits}/{total}")
                })?;
                checked += 1;
            }
        }
        let stats = CellStats {
            strategy_id: "s".into(),
            problem_id: "p".into(),
            n_attempts: n,
            n_correct: 0,
            mean_cost: Money::from_integer(1),
        };
        ensure(
            success_prob(&stats, SuccessMode::PassAtK(n + 1)).is_err(),
            || format!("k > n accepted at n={n}"),
        )?;
    }
    Ok(format!("{checked} (n, c, k) triples"))
}

// ---------------------------------------------------------------- 8

fn protocol_conformance() -> Verdict {
    let golden = include_str!("golden/prompt_2plus2.txt");
    let problem = ProblemInstance {
        dataset_id: "d".into(),
        problem_id: "p".into(),
        input_text: "2+2?".into(),
        reference_answer: "4".into(),
    };
    let rendered = render_prompt(&problem, None);
    ensure(rendered == golden, || {
        "rendered prompt differs from golden file".into()
    })?;

    let extraction: [(&str, Option<&str>); 6] = [
        ("...<answer>42</answer>", Some("42")),
        ("<answer>A</answer> then <answer>(B)</answer>", Some("(B)")),
        ("<answer>42", None),
        ("no block at all", None),
        ("<answer>\n  (C)\n</answer>", Some("(C)")),
        ("<answer>1</answer> trailing </answer>", Some("1")),
    ];
    for (text, want) in extraction {
        let got = extract_answer(text);
        ensure(got.as_deref() == want, || {
            format!("extract({text:?}) = {got:?}")
        })?;
    }

    let ds = |kind| DatasetRef {
        id: "d".into(),
        task_category: TaskCategory::Other,
        grader_kind: kind,
        option_count: None,
        numeric_tolerance: None,
    };
    let pr = |r: &str| ProblemInstance {
        reference_answer: r.into(),
        ..problem.clone()
    };
    let grading: [(Option<&str>, &str, GraderKind, bool); 8] = [
        (Some("(A)"), "A", GraderKind::MultipleChoice, true),
        (Some("b."), "(B)", GraderKind::MultipleChoice, true),
        (Some("(C)"), "A", GraderKind::MultipleChoice, false),
        (Some("42.0"), "42", GraderKind::Numeric, true),
        (Some("+1,024"), "1024", GraderKind::Numeric, true),
        (Some("41.9"), "42", GraderKind::Numeric, false),
        (Some(" Paris "), "paris", GraderKind::FreeResponse, true),
        (None, "A", GraderKind::MultipleChoice, false),
    ];
    for (got, reference, kind, want) in grading {
        ensure(grade(got, &pr(reference), &ds(kind)) == want, || {
            format!("grade({got:?}, {reference:?}, {kind:?}) != {want}")
        })?;
    }

    let provider = |url: &str| {
        let mut cfg = ProviderConfig::http("stub", url, "m");
        cfg.retry_base_ms = Some(1);
        cfg.timeout_secs = Some(10);
        HttpProvider::from_config(&cfg).unwrap()
    };
    let s = SamplingConfig::default();

    let server = support::StubServer::start(vec![(200, support::OK_BODY.into())]);
    let c = provider(&server.url)
        .chat("2+2?", &s)
        .map_err(|e| e.to_string())?;
    ensure(c.input_tokens == 10 && c.output_tokens == 5, || {
        format!("{c:?}")
    })?;
    ensure(
        server.request_json(0)["messages"][0]["content"] == "2+2?",
        || "request body".into(),
    )?;
    server.join();

    let mut script = vec![(429u16, "{}".to_string()); 3];
    script.push((200, support::OK_BODY.into()));
    let server = support::StubServer::start(script);
    provider(&server.url)
        .chat("q", &s)
        .map_err(|e| format!("429 retry: {e}"))?;
    ensure(server.request_count() == 4, || {
        format!("{} requests", server.request_count())
    })?;
    server.join();

    let server = support::StubServer::start(vec![(200, support::NO_USAGE_BODY.into())]);
    let err = provider(&server.url).chat("q", &s);
    ensure(matches!(err, Err(ProviderError::Protocol(_))), || {
        format!("missing usage gave {err:?}")
    })?;
    server.join();

    Ok("golden prompt, 6 extraction + 8 grading examples, 3 stub-server cases".into())
}

// ---------------------------------------------------------------- 9

/// Regression value of the aggregate frontier on the fixture below.
// per-problem minima 1, 4, 4
const PINNED_FRONTIER: (i64, i64) = (3, 1);

fn per_problem_semantics() -> Verdict {
    // (strategy, problem, n, c, mean cost)
    let cells: [(&str, &str, u32, u32, i64); 9] = [
        ("a", "p1", 8, 8, 1),
        ("a", "p2", 8, 1, 1),
        ("a", "p3", 8, 4, 2),
        ("b", "p1", 8, 2, 1),
        ("b", "p2", 8, 8, 4),
        ("b", "p3", 8, 0, 1),
        ("expert", "p1", 1, 1, 20),
        ("expert", "p2", 1, 1, 20),
        ("expert", "p3", 1, 1, 20),
    ];
    let table: StatsTable = cells
        .iter()
        .map(|&(s, p, n, c, cost)| CellStats {
            strategy_id: s.into(),
            problem_id: p.into(),
            n_attempts: n,
            n_correct: c,
            mean_cost: Money::from_integer(cost),
        })
        .collect();
    let raw: HashMap<(String, String), Vec<(bool, Q)>> = cells
        .iter()
        .map(|&(s, p, n, c, cost)| {
            let attempts = (0..n)
                .map(|i| (i < c, Q::from_integer(BigInt::from(cost))))
                .collect();
            ((s.to_string(), p.to_string()), attempts)
        })
        .collect();
    let oracle = Oracle::from_attempts(&raw);
    let problems = ["p1", "p2", "p3"];
    let a = Strategy::model(
        "a",
        Family::Large,
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
    );
    let b = Strategy::model(
        "b",
        Family::Large,
        NaiveDate::from_ymd_opt(2024, 2, 1).unwrap(),
    );
    let e = Strategy::expert("expert");

    let ev = Evaluator::pass1(&table).map_err(|e| e.to_string())?;
    let lib = ev
        .frontier(&problems, &[&a, &b])
        .map_err(|e| e.to_string())?
        .value;
    let want = oracle.frontier(&["a", "b"], &problems);
    let pinned = q(PINNED_FRONTIER.0, PINNED_FRONTIER.1);
    ensure(want.as_ref() == Some(&pinned), || {
        format!("oracle {} vs pinned {pinned}", show(&want))
    })?;
    ensure(ext_eq(&lib, &want), || {
        format!("library {lib} vs oracle {}", show(&want))
    })?;

    // ratio of aggregates: mean cost over mean accuracy per strategy, then
    // minimised; gives 32/13 here
    let ratio_of_aggregates = |s: &str| -> Q {
        let rows: Vec<_> = cells.iter().filter(|c| c.0 == s).collect();
        let mean_cost = rows
            .iter()
            .fold(Q::zero(), |acc, r| acc + Q::from_integer(r.4.into()))
            / q(rows.len() as i64, 1);
        let mean_acc = rows
            .iter()
            .fold(Q::zero(), |acc, r| acc + q(r.3 as i64, r.2 as i64))
            / q(rows.len() as i64, 1);
        mean_cost / mean_acc
    };
    let alt = std::cmp::min(ratio_of_aggregates("a"), ratio_of_aggregates("b"));
    ensure(alt != pinned, || {
        "fixture does not separate the two aggregations".into()
    })?;

    let with_expert = ev
        .frontier(&problems, &[&a, &b, &e])
        .map_err(|e| e.to_string())?
        .value;
    let want_e = oracle.frontier(&["a", "b", "expert"], &problems);
    ensure(ext_eq(&with_expert, &want_e), || {
        format!("with expert {with_expert} vs {}", show(&want_e))
    })?;
    Ok(format!(
        "mean of per-problem minima {pinned} = {:.4}, ratio of aggregates {alt} = {:.4}",
        lib.to_f64(),
        alt.numer().to_string().parse::<f64>().unwrap()
            / alt.denom().to_string().parse::<f64>().unwrap()
    ))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "expert-cost reproduction",
            Duration::from_secs(1),
            expert_costs,
        ),
        (
            "random-guesser identity",
            Duration::from_secs(10),
            random_guesser_identity,
        ),
        (
            "oracle equivalence",
            Duration::from_secs(30),
            oracle_equivalence,
        ),
        (
            "monotonicity properties",
            Duration::from_secs(60),
            monotonicity_suite,
        ),
        ("decay-fit recovery", Duration::from_secs(30), fit_recovery),
        (
            "bootstrap correctness",
            Duration::from_secs(300),
            bootstrap_correctness,
        ),
        (
            "pass@k enumeration",
            Duration::from_secs(10),
            pass_at_k_enumeration,
        ),
        (
            "protocol conformance",
            Duration::from_secs(10),
            protocol_conformance,
        ),
        (
            "per-problem aggregation",
            Duration::from_secs(1),
            per_problem_semantics,
        ),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; over budget {budget:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!(
                "PASS {} {name} ({:.2}s): {detail}",
                i + 1,
                elapsed.as_secs_f64()
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "FAIL {} {name} ({:.2}s): {detail}",
                    i + 1,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
