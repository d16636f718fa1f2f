use clap::{Args, ValueEnum};
use cost_of_pass::analysis::technique_groups;
use cost_of_pass::statistics::{bootstrap_ci, BootstrapCI, BootstrapConfig, Statistic};
use cost_of_pass::{ExtMoney, Fraction};
use serde::Serialize;

use super::technique::bases_of;
use super::Status;
use crate::context::{DataArgs, Workspace};
use crate::error::CliError;
use crate::output::{money_csv, money_table, percent_table, render_table, Artifacts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticKind {
    /// Frontier over the selected strategies.
    Frontier,
    /// Gain of `--new` over the rest of the selection.
    Gain,
    /// Essentialness of `--removed` within the selection.
    Essentialness,
    /// Relative gain of the `--technique` group over its bases.
    TechniqueGain,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "frontier")]
    pub statistic: StatisticKind,
    #[arg(long, value_delimiter = ',')]
    pub new: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub removed: Vec<String>,
    /// Technique label; may be omitted when only one is selected.
    #[arg(long)]
    pub technique: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub resamples: u32,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Resample problems too, not only attempts within cells.
    #[arg(long)]
    pub problem_level: bool,
}

#[derive(Serialize)]
struct Row {
    dataset_id: String,
    relative: bool,
    ci: BootstrapCI,
}

fn ids(v: &[&cost_of_pass::records::Strategy]) -> Vec<String> {
    v.iter().map(|s| s.id.clone()).collect()
}

fn require_subset(what: &str, wanted: &[String], available: &[String]) -> Result<(), CliError> {
    if wanted.is_empty() {
        return Err(CliError::Config(format!(
            "--{what} needs at least one strategy"
        )));
    }
    match wanted.iter().find(|w| !available.contains(w)) {
        Some(bad) => Err(CliError::Config(format!(
            "--{what} names {bad:?}, which is not selected"
        ))),
        None => Ok(()),
    }
}

pub fn run(args: &BootstrapArgs) -> Result<Status, CliError> {
    let ws = Workspace::load(&args.data)?;
    let config = BootstrapConfig {
        n_resamples: args.resamples,
        level: args.level,
        seed: args.seed,
        mode: args.data.mode,
        failure_penalty: args.data.failure_penalty.clone(),
        problem_level: args.problem_level,
    };
    let mut rows = Vec::new();
    for d in ws.datasets()? {
        let all = ws.strategies_for(&d.id, |_| true)?;
        let all_ids = ids(&all);
        let statistic = match args.statistic {
            StatisticKind::Frontier => Statistic::Frontier {
                strategies: all_ids,
            },
            StatisticKind::Gain => {
                require_subset("new", &args.new, &all_ids)?;
                let base: Vec<String> = all_ids
                    .iter()
                    .filter(|s| !args.new.contains(s))
                    .cloned()
                    .collect();
                Statistic::Gain {
                    new: args.new.clone(),
                    base,
                }
            }
            StatisticKind::Essentialness => {
                require_subset("removed", &args.removed, &all_ids)?;
                Statistic::Essentialness {
                    removed: args.removed.clone(),
                    all: all_ids,
                }
            }
            StatisticKind::TechniqueGain => {
                let groups = technique_groups(&all);
                let group = match &args.technique {
                    Some(t) => groups.into_iter().find(|(label, _)| label == t),
                    None if groups.len() == 1 => groups.into_iter().next(),
                    None => {
                        return Err(CliError::Config(format!(
                            "{} techniques selected; pick one with --technique",
                            groups.len()
                        )))
                    }
                };
                let Some((_, members)) = group else {
                    return Err(CliError::MissingData(format!(
                        "no such technique in dataset {:?}",
                        d.id
                    )));
                };
                Statistic::TechniqueGain {
                    base: ids(&bases_of(&members, &all)?),
                    modified: ids(&members),
                }
            }
        };
        let problems = ws.problems(&d.id)?;
        let obs = ws.observations(&d.id, &all)?;
        let ci = bootstrap_ci(&obs, &all, &problems, &statistic, &config)?;
        rows.push(Row {
            dataset_id: d.id.clone(),
            relative: statistic.is_relative(),
            ci,
        });
    }

    let shown = |relative: bool, v: &ExtMoney| match (relative, v) {
        (true, ExtMoney::Finite(m)) => percent_table(&Fraction(m.as_rational().clone())),
        _ => money_table(v),
    };
    let header = [
        "statistic",
        "dataset",
        "unit",
        "point",
        "lower",
        "midpoint",
        "upper",
    ];
    let unit = |relative: bool| {
        if relative {
            "fraction".to_string()
        } else {
            args.data.currency.clone()
        }
    };
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.ci.statistic_label.clone(),
                r.dataset_id.clone(),
                unit(r.relative),
                money_csv(&r.ci.point),
                money_csv(&r.ci.lower),
                money_csv(&r.ci.midpoint),
                money_csv(&r.ci.upper),
            ]
        })
        .collect();
    let text_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.ci.statistic_label.clone(),
                r.dataset_id.clone(),
                if r.relative {
                    "%".into()
                } else {
                    args.data.currency.clone()
                },
                shown(r.relative, &r.ci.point),
                shown(r.relative, &r.ci.lower),
                shown(r.relative, &r.ci.midpoint),
                shown(r.relative, &r.ci.upper),
            ]
        })
        .collect();

    let mut manifest = args.data.manifest("bootstrap")?;
    manifest.seed = Some(args.seed);
    manifest.param("statistic", format!("{:?}", args.statistic));
    manifest.param("new", &args.new);
    manifest.param("removed", &args.removed);
    manifest.param("technique", &args.technique);
    manifest.param("resamples", args.resamples);
    manifest.param("level", args.level);
    manifest.param("problem_level", args.problem_level);
    let out = Artifacts::create(&args.data.out, &manifest)?;
    out.csv("bootstrap.csv", &header, &csv_rows)?;
    let mut table = render_table(&header, &text_rows);
    table.push_str(&format!(
        "{}% percentile intervals from {} resamples, seed {}\n",
        args.level * 100.0,
        args.resamples,
        args.seed
    ));
    print!("{table}");
    out.text("bootstrap.txt", &table)?;
    out.json("bootstrap.json", serde_json::json!({ "rows": rows }))?;
    Ok(Status::Ok)
}
