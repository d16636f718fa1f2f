use clap::Args;
use cost_of_pass::analysis::{technique_gain, technique_groups, TechniqueGainReport};
use cost_of_pass::metrics::union;
use cost_of_pass::records::Strategy;
use serde::Serialize;

use super::Status;
use crate::context::{DataArgs, Workspace};
use crate::error::CliError;
use crate::output::{money_csv, money_table, percent_csv, percent_table, render_table, Artifacts};

#[derive(Debug, Args)]
pub struct TechniqueArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Include the human experts in both the base and the augmented set.
    #[arg(long)]
    pub with_expert: bool,
}

/// Base strategies of a technique group, in registry order. A base that is
/// missing from `available` is an unlinked technique.
pub fn bases_of<'a>(
    members: &[&Strategy],
    available: &[&'a Strategy],
) -> Result<Vec<&'a Strategy>, CliError> {
    let mut ids: Vec<&str> = Vec::new();
    for m in members {
        let Some(b) = m.base_strategy_id.as_deref() else {
            return Err(CliError::Config(format!(
                "technique strategy {:?} has no base_strategy_id",
                m.id
            )));
        };
        if !available.iter().any(|s| s.id == b) {
            return Err(CliError::Config(format!(
                "technique strategy {:?} references base {b:?}, which is not among the selected strategies",
                m.id
            )));
        }
        ids.push(b);
    }
    Ok(available
        .iter()
        .copied()
        .filter(|s| ids.contains(&s.id.as_str()))
        .collect())
}

#[derive(Serialize)]
struct Report {
    with_expert: bool,
    rows: Vec<TechniqueGainReport>,
}

pub fn run(args: &TechniqueArgs) -> Result<Status, CliError> {
    let ws = Workspace::load(&args.data)?;
    let mut reports = Vec::new();
    for d in ws.datasets()? {
        let all = ws.strategies_for(&d.id, |_| true)?;
        let groups = technique_groups(&all);
        if groups.is_empty() {
            return Err(CliError::MissingData(format!(
                "no technique-modified strategies selected for dataset {:?}",
                d.id
            )));
        }
        let problems = ws.problems(&d.id)?;
        let ev = ws.evaluator(&d.id, &all)?;
        let experts: Vec<&Strategy> = all.iter().copied().filter(|s| s.is_expert()).collect();
        for (label, members) in groups {
            let mut base = bases_of(&members, &all)?;
            if args.with_expert {
                base = union(&base, &experts);
            }
            reports.push(technique_gain(
                &ev, &d.id, &problems, &label, &base, &members,
            )?);
        }
    }

    let header = [
        "technique",
        "dataset",
        "base_set",
        "relative_gain_percent",
        "v_base",
        "v_with_technique",
    ];
    let csv_rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.technique_id.clone(),
                r.dataset_id.clone(),
                r.base_set_descriptor.clone(),
                percent_csv(&r.relative_gain),
                money_csv(&r.v_base),
                money_csv(&r.v_with_technique),
            ]
        })
        .collect();
    let text_rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.technique_id.clone(),
                r.dataset_id.clone(),
                r.base_set_descriptor.clone(),
                percent_table(&r.relative_gain),
                money_table(&r.v_base),
                money_table(&r.v_with_technique),
            ]
        })
        .collect();

    let mut manifest = args.data.manifest("technique")?;
    manifest.param("with_expert", args.with_expert);
    let out = Artifacts::create(&args.data.out, &manifest)?;
    out.csv("technique.csv", &header, &csv_rows)?;
    let table = render_table(&header, &text_rows);
    print!("{table}");
    out.text("technique.txt", &table)?;
    out.json(
        "technique.json",
        Report {
            with_expert: args.with_expert,
            rows: reports,
        },
    )?;
    Ok(Status::Ok)
}
