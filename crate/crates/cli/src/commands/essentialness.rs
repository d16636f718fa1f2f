use clap::{Args, ValueEnum};
use cost_of_pass::analysis::{
    expert_essentialness, family_essentialness, single_model_essentialness, EssentialnessReport,
    Subject,
};
use cost_of_pass::records::{Family, Strategy};
use serde::Serialize;

use super::Status;
use crate::context::{DataArgs, Workspace};
use crate::error::CliError;
use crate::output::{money_csv, money_table, percent_csv, percent_table, render_table, Artifacts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum By {
    Family,
    Model,
    Expert,
}

#[derive(Debug, Args)]
pub struct EssentialnessArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// What to remove: each model family, each single model, or the experts.
    #[arg(long, value_enum)]
    pub by: By,
}

const FAMILIES: [Family; 4] = [
    Family::Lightweight,
    Family::Large,
    Family::Reasoning,
    Family::Other,
];

fn subject_label(s: &Subject) -> String {
    match s {
        Subject::Family(f) => f.to_string(),
        Subject::Strategy(id) => id.clone(),
        Subject::Expert => "expert".into(),
    }
}

#[derive(Serialize)]
struct Report {
    by: By,
    rows: Vec<EssentialnessReport>,
}

pub fn run(args: &EssentialnessArgs) -> Result<Status, CliError> {
    let ws = Workspace::load(&args.data)?;
    let mut reports: Vec<EssentialnessReport> = Vec::new();
    for d in ws.datasets()? {
        let all = ws.strategies_for(&d.id, |_| true)?;
        let problems = ws.problems(&d.id)?;
        let ev = ws.evaluator(&d.id, &all)?;
        let lms: Vec<&Strategy> = all.iter().copied().filter(|s| !s.is_expert()).collect();
        match args.by {
            By::Family => {
                for f in FAMILIES
                    .into_iter()
                    .filter(|f| lms.iter().any(|s| s.family == *f))
                {
                    reports.push(family_essentialness(&ev, &d.id, &problems, f, &all)?);
                }
            }
            By::Model => {
                for s in &lms {
                    reports.push(single_model_essentialness(&ev, &d.id, &problems, s, &all)?);
                }
            }
            By::Expert => {
                for e in all.iter().filter(|s| s.is_expert()) {
                    let mut r = expert_essentialness(&ev, &d.id, &problems, &lms, e)?;
                    if all.iter().filter(|s| s.is_expert()).count() > 1 {
                        r.subject = Subject::Strategy(e.id.clone());
                    }
                    reports.push(r);
                }
            }
        }
    }

    let header = [
        "subject",
        "dataset",
        "essentialness_percent",
        "v_full",
        "v_without",
    ];
    let csv_rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                subject_label(&r.subject),
                r.dataset_id.clone(),
                percent_csv(&r.relative_improvement),
                money_csv(&r.v_full),
                money_csv(&r.v_without),
            ]
        })
        .collect();
    let text_rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                subject_label(&r.subject),
                r.dataset_id.clone(),
                percent_table(&r.relative_improvement),
                money_table(&r.v_full),
                money_table(&r.v_without),
            ]
        })
        .collect();

    let by = format!("{:?}", args.by).to_lowercase();
    let mut manifest = args.data.manifest("essentialness")?;
    manifest.param("by", &by);
    let out = Artifacts::create(&args.data.out, &manifest)?;
    out.csv(&format!("essentialness_{by}.csv"), &header, &csv_rows)?;
    let table = render_table(&header, &text_rows);
    print!("{table}");
    out.text(&format!("essentialness_{by}.txt"), &table)?;
    out.json(
        &format!("essentialness_{by}.json"),
        Report {
            by: args.by,
            rows: reports,
        },
    )?;
    Ok(Status::Ok)
}
