//! Helpers for driving the binary against generated bundles.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cost-of-pass"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A CSV artifact split into its manifest hash, header and rows.
pub struct Csv {
    pub hash: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn read(path: &Path) -> Csv {
        let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let (first, rest) = text.split_once('\n').unwrap();
        let hash = first
            .strip_prefix("# manifest ")
            .expect("manifest line")
            .to_string();
        let mut lines = rest
            .lines()
            .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>());
        let header = lines.next().unwrap();
        Csv {
            hash,
            header,
            rows: lines.collect(),
        }
    }

    pub fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    /// Value in the row whose first cell is `key`.
    pub fn get(&self, key: &str, column: &str) -> String {
        let c = self.col(column);
        self.rows
            .iter()
            .find(|r| r[0] == key)
            .unwrap_or_else(|| panic!("no row {key}"))[c]
            .clone()
    }

    pub fn num(&self, key: &str, column: &str) -> f64 {
        self.get(key, column).parse().unwrap()
    }
}

pub fn manifest_hash(out: &Path, command: &str) -> String {
    let text = fs::read_to_string(out.join(format!("{command}.manifest.json"))).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["manifest_hash"].as_str().unwrap().to_string()
}

/// Builds a registry bundle plus a records file from TOML and JSONL
/// snippets.
#[derive(Default)]
pub struct Bundle {
    datasets: Vec<String>,
    problems: Vec<String>,
    strategies: Vec<String>,
    sheets: Vec<String>,
    experts: Vec<String>,
    records: Vec<String>,
    next_index: std::collections::HashMap<(String, String), u32>,
}

impl Bundle {
    pub fn new() -> Bundle {
        let mut b = Bundle::default();
        b.sheets.push(
            "[[price_sheets]]\nid = \"flat\"\ncurrency = \"USD\"\ninput_price_per_million_tokens = \"1\"\noutput_price_per_million_tokens = \"1\"\n"
                .into(),
        );
        b
    }

    /// A numeric dataset with problems `p0..p{n-1}`.
    pub fn dataset(mut self, id: &str, n: usize) -> Bundle {
        self.datasets.push(format!(
            "[[datasets]]\nid = \"{id}\"\ntask_category = \"other\"\ngrader_kind = \"numeric\"\n"
        ));
        for i in 0..n {
            self.problems.push(format!(
                "[[problems]]\ndataset_id = \"{id}\"\nproblem_id = \"p{i}\"\ninput_text = \"q{i}\"\nreference_answer = \"{i}\"\n"
            ));
        }
        self
    }

    pub fn model(mut self, id: &str, family: &str, date: &str) -> Bundle {
        self.strategies.push(format!(
            "[[strategies]]\nid = \"{id}\"\nkind = \"model\"\nfamily = \"{family}\"\nrelease_date = \"{date}\"\nprice_sheet_id = \"flat\"\n"
        ));
        self
    }

    pub fn technique(mut self, id: &str, base: &str, family: &str, technique: &str) -> Bundle {
        self.strategies.push(format!(
            "[[strategies]]\nid = \"{id}\"\nkind = \"technique_modified\"\nfamily = \"{family}\"\nrelease_date = \"2024-01-01\"\nprice_sheet_id = \"flat\"\nbase_strategy_id = \"{base}\"\ntechnique = \"{technique}\"\n"
        ));
        self
    }

    /// An expert costing `cost` per problem on `dataset` ($60/h for `cost` minutes).
    pub fn expert(mut self, id: &str, dataset: &str, cost: &str) -> Bundle {
        if !self
            .strategies
            .iter()
            .any(|s| s.contains(&format!("id = \"{id}\"\n")))
        {
            self.strategies.push(format!(
                "[[strategies]]\nid = \"{id}\"\nkind = \"expert\"\nfamily = \"expert\"\n"
            ));
        }
        self.experts.push(format!(
            "[[expert_profiles]]\nid = \"{id}-{dataset}\"\nstrategy_id = \"{id}\"\ndataset_id = \"{dataset}\"\ncurrency = \"USD\"\nhourly_rate_low = \"60\"\nhourly_rate_high = \"60\"\nminutes_per_problem = \"{cost}\"\n"
        ));
        self
    }

    /// Attempts with an explicit cost each; `outcomes` lists correctness.
    pub fn attempts(
        mut self,
        strategy: &str,
        dataset: &str,
        problem: &str,
        cost: &str,
        outcomes: &[bool],
    ) -> Bundle {
        for &correct in outcomes {
            let key = (strategy.to_string(), format!("{dataset}/{problem}"));
            let idx = self.next_index.entry(key).or_insert(0);
            self.records.push(
                serde_json::json!({
                    "strategy_id": strategy,
                    "dataset_id": dataset,
                    "problem_id": problem,
                    "attempt_index": *idx,
                    "correct": correct,
                    "input_tokens": 0,
                    "output_tokens": 0,
                    "cost_override": cost,
                })
                .to_string(),
            );
            *idx += 1;
        }
        self
    }

    /// Writes `registry/` and `records.jsonl` under `dir`.
    pub fn write(&self, dir: &Path) -> (PathBuf, PathBuf) {
        let reg = dir.join("registry");
        fs::create_dir_all(&reg).unwrap();
        let files = [
            ("datasets.toml", &self.datasets),
            ("problems.toml", &self.problems),
            ("strategies.toml", &self.strategies),
            ("price_sheets.toml", &self.sheets),
            ("expert_profiles.toml", &self.experts),
        ];
        for (name, parts) in files {
            fs::write(reg.join(name), parts.join("\n")).unwrap();
        }
        let records = dir.join("records.jsonl");
        fs::write(&records, self.records.join("\n") + "\n").unwrap();
        (reg, records)
    }
}

/// Reads an exact value as written in JSON outputs: "a/b", "a" or "inf".
pub fn ratio(v: &serde_json::Value) -> f64 {
    let s = v.as_str().unwrap_or_else(|| panic!("not a string: {v}"));
    if s == "inf" {
        return f64::INFINITY;
    }
    match s.split_once('/') {
        Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
        None => s.parse().unwrap(),
    }
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

pub fn close(a: f64, b: f64) -> bool {
    (a == b) || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}
