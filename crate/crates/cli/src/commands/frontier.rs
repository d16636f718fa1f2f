use clap::Args;
use cost_of_pass::metrics::{union, FrontierResult};
use cost_of_pass::records::Strategy;
use cost_of_pass::ExtMoney;
use serde::Serialize;

use super::Status;
use crate::context::{DataArgs, Workspace};
use crate::error::CliError;
use crate::output::{lowest, money_csv, money_table, render_table, Artifacts};

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Pair each strategy with the human experts: V({m} ∪ experts).
    #[arg(long)]
    pub with_expert: bool,
}

#[derive(Serialize)]
struct DatasetFrontier {
    dataset_id: String,
    /// Value per strategy row, registry order.
    rows: Vec<(String, ExtMoney)>,
    /// Frontier over every evaluated strategy.
    frontier: FrontierResult,
}

#[derive(Serialize)]
struct Report {
    mode: String,
    with_expert: bool,
    datasets: Vec<DatasetFrontier>,
}

pub fn run(args: &FrontierArgs) -> Result<Status, CliError> {
    let ws = Workspace::load(&args.data)?;
    let datasets = ws.datasets()?;
    let selection = ws.selection()?;

    let mut columns: Vec<DatasetFrontier> = Vec::new();
    for d in &datasets {
        let strategies = ws.strategies_for(&d.id, |_| true)?;
        let problems = ws.problems(&d.id)?;
        let ev = ws.evaluator(&d.id, &strategies)?;
        let experts: Vec<&Strategy> = strategies
            .iter()
            .copied()
            .filter(|s| s.is_expert())
            .collect();
        let mut rows = Vec::new();
        for s in &strategies {
            let set = if args.with_expert {
                union(&[s], &experts)
            } else {
                vec![*s]
            };
            rows.push((s.id.clone(), ev.frontier(&problems, &set)?.value));
        }
        columns.push(DatasetFrontier {
            dataset_id: d.id.clone(),
            rows,
            frontier: ev.frontier(&problems, &strategies)?,
        });
    }

    // rows: every selected strategy evaluated on at least one dataset
    let row_ids: Vec<&Strategy> = selection
        .iter()
        .copied()
        .filter(|s| {
            columns
                .iter()
                .any(|c| c.rows.iter().any(|(id, _)| *id == s.id))
        })
        .collect();
    let cell = |c: &DatasetFrontier, id: &str| {
        c.rows.iter().find(|(r, _)| r == id).map(|(_, v)| v.clone())
    };
    let flagged: Vec<Vec<usize>> = columns
        .iter()
        .map(|c| {
            let vals: Vec<&ExtMoney> = c.rows.iter().map(|(_, v)| v).collect();
            lowest(&vals, 3)
                .into_iter()
                .map(|i| row_ids.iter().position(|s| s.id == c.rows[i].0).unwrap())
                .collect()
        })
        .collect();

    let mut header = vec!["strategy", "family"];
    header.extend(columns.iter().map(|c| c.dataset_id.as_str()));
    let mut csv_rows = Vec::new();
    let mut text_rows = Vec::new();
    for (i, s) in row_ids.iter().enumerate() {
        let mut csv_row = vec![s.id.clone(), s.family.to_string()];
        let mut text_row = csv_row.clone();
        for (c, flags) in columns.iter().zip(&flagged) {
            match cell(c, &s.id) {
                Some(v) => {
                    csv_row.push(money_csv(&v));
                    let mark = if flags.contains(&i) { "*" } else { " " };
                    text_row.push(format!("{}{mark}", money_table(&v)));
                }
                None => {
                    csv_row.push(String::new());
                    text_row.push("- ".into());
                }
            }
        }
        csv_rows.push(csv_row);
        text_rows.push(text_row);
    }

    let mut manifest = args.data.manifest("frontier")?;
    manifest.param("with_expert", args.with_expert);
    let out = Artifacts::create(&args.data.out, &manifest)?;
    out.csv("frontier.csv", &header, &csv_rows)?;
    let mut table = render_table(&header, &text_rows);
    table.push_str(&format!(
        "* lowest three per dataset; {} cost-of-pass in {}{}\n",
        args.data.mode,
        args.data.currency,
        if args.with_expert {
            ", each strategy paired with the experts"
        } else {
            ""
        }
    ));
    print!("{table}");
    out.text("frontier.txt", &table)?;
    out.json(
        "frontier.json",
        Report {
            mode: args.data.mode.to_string(),
            with_expert: args.with_expert,
            datasets: columns,
        },
    )?;
    Ok(Status::Ok)
}
