use clap::Args;
use cost_of_pass::analysis::release_relative_gain;
use cost_of_pass::records::StrategyKind;
use cost_of_pass::statistics::{fit_decay, months_between, DecayFit};
use cost_of_pass::{ExtMoney, Fraction, Money};
use serde::Serialize;

use super::Status;
use crate::context::{DataArgs, Workspace};
use crate::error::CliError;
use crate::output::{
    money_csv, money_table, percent_csv, percent_table, render_table, Artifacts, TABLE_SIG_FIGS,
};

#[derive(Debug, Args)]
pub struct TimelineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Fit V(t) = a·exp(-b t) + c over the release points and report the
    /// half-life.
    #[arg(long)]
    pub fit: bool,
}

struct Row {
    date: String,
    months: Option<f64>,
    strategies: Vec<String>,
    value: ExtMoney,
    normalized: Option<Money>,
    release_gain: Option<Fraction>,
}

#[derive(Serialize)]
struct FitPoint {
    release_date: String,
    months: f64,
    value: ExtMoney,
}

#[derive(Serialize)]
struct FitReport {
    dataset_id: String,
    /// Time origin of the fit: the first release date.
    origin: String,
    time_unit: &'static str,
    fit: DecayFit,
    points: Vec<FitPoint>,
}

/// `v / base` as a percentage; `None` when the base is INFINITY or zero.
fn normalized(v: &ExtMoney, base: &ExtMoney) -> Option<Money> {
    let b = base.finite()?;
    if b.is_zero() {
        return None;
    }
    v.ratio(base).map(|r| Fraction(r).percent())
}

pub fn run(args: &TimelineArgs) -> Result<Status, CliError> {
    let ws = Workspace::load(&args.data)?;
    let datasets = ws.datasets()?;
    let mut manifest = args.data.manifest("timeline")?;
    manifest.param("fit", args.fit);
    let out = Artifacts::create(&args.data.out, &manifest)?;
    let mut text = String::new();
    let mut fit_failure = None;

    for d in &datasets {
        // technique variants are not releases
        let strategies = ws.strategies_for(&d.id, |s| s.kind != StrategyKind::TechniqueModified)?;
        let problems = ws.problems(&d.id)?;
        let ev = ws.evaluator(&d.id, &strategies)?;
        let gains = release_relative_gain(&ev, &problems, &strategies)?;
        let Some(first) = gains.first() else {
            return Err(CliError::MissingData(format!(
                "dataset {:?} has no model releases",
                d.id
            )));
        };
        let origin = first.event.date;
        let baseline = first.v_before.clone();
        let expert_ids: Vec<String> = strategies
            .iter()
            .filter(|s| s.is_expert())
            .map(|s| s.id.clone())
            .collect();

        let mut rows = vec![Row {
            date: String::new(),
            months: None,
            strategies: expert_ids,
            value: baseline.clone(),
            normalized: normalized(&baseline, &baseline),
            release_gain: None,
        }];
        for g in &gains {
            rows.push(Row {
                date: g.event.date.to_string(),
                months: Some(months_between(origin, g.event.date)),
                strategies: g.event.strategy_ids.clone(),
                value: g.v_after.clone(),
                normalized: normalized(&g.v_after, &baseline),
                release_gain: Some(g.relative_gain.clone()),
            });
        }

        let header = [
            "release_date",
            "months",
            "V",
            "V_normalized_percent",
            "release_gain_percent",
            "strategies",
        ];
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.date.clone(),
                    r.months.map(|m| m.to_string()).unwrap_or_default(),
                    money_csv(&r.value),
                    r.normalized
                        .as_ref()
                        .map(Money::to_full_precision_string)
                        .unwrap_or_default(),
                    r.release_gain.as_ref().map(percent_csv).unwrap_or_default(),
                    r.strategies.join("+"),
                ]
            })
            .collect();
        out.csv(&format!("timeline_{}.csv", d.id), &header, &csv_rows)?;

        let text_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    if r.date.is_empty() {
                        "baseline".into()
                    } else {
                        r.date.clone()
                    },
                    r.months
                        .map(|m| format!("{m:.2}"))
                        .unwrap_or_else(|| "-".into()),
                    money_table(&r.value),
                    r.normalized
                        .as_ref()
                        .map(|p| format!("{}%", p.format_significant(TABLE_SIG_FIGS)))
                        .unwrap_or_else(|| "-".into()),
                    r.release_gain
                        .as_ref()
                        .map(percent_table)
                        .unwrap_or_else(|| "-".into()),
                    r.strategies.join("+"),
                ]
            })
            .collect();
        text.push_str(&format!("dataset {}\n", d.id));
        text.push_str(&render_table(
            &["release", "months", "V", "normalized", "gain", "strategies"],
            &text_rows,
        ));

        if args.fit {
            let series: Vec<(f64, ExtMoney)> = rows[1..]
                .iter()
                .map(|r| {
                    (
                        r.months.expect("release rows carry months"),
                        r.value.clone(),
                    )
                })
                .collect();
            match fit_decay(&series) {
                Ok(fit) => {
                    match fit.half_life_months {
                        Some(h) => text.push_str(&format!(
                            "half-life {h:.3} months (b = {:.6}/month)\n",
                            fit.b
                        )),
                        None => text
                            .push_str("no half-life: fit did not converge to a decaying curve\n"),
                    }
                    if !fit.converged {
                        fit_failure
                            .get_or_insert(format!("fit for dataset {:?} did not converge", d.id));
                    }
                    let plot: Vec<Vec<String>> = rows[1..]
                        .iter()
                        .map(|r| {
                            let t = r.months.unwrap();
                            vec![
                                r.date.clone(),
                                t.to_string(),
                                money_csv(&r.value),
                                fit.predict(t).to_string(),
                            ]
                        })
                        .collect();
                    out.csv(
                        &format!("timeline_{}_fit.csv", d.id),
                        &["release_date", "t_months", "observed_V", "fitted_V"],
                        &plot,
                    )?;
                    let points = rows[1..]
                        .iter()
                        .map(|r| FitPoint {
                            release_date: r.date.clone(),
                            months: r.months.unwrap(),
                            value: r.value.clone(),
                        })
                        .collect();
                    out.json(
                        &format!("timeline_{}_fit.json", d.id),
                        FitReport {
                            dataset_id: d.id.clone(),
                            origin: origin.to_string(),
                            time_unit: "months",
                            fit,
                            points,
                        },
                    )?;
                }
                Err(e) => {
                    fit_failure.get_or_insert(format!("fit for dataset {:?}: {e}", d.id));
                }
            }
        }
        text.push('\n');
    }
    print!("{text}");
    out.text("timeline.txt", &text)?;
    match fit_failure {
        Some(msg) => Err(CliError::Numeric(msg)),
        None => Ok(Status::Ok),
    }
}
