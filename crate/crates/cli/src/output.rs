//! Writing artifacts: CSV at full precision, aligned text at 4 significant
//! figures, JSON and JSONL. Every file carries the manifest hash.

use std::fs;
use std::path::{Path, PathBuf};

use cost_of_pass::{ExtMoney, Fraction};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::RunManifest;

pub const TABLE_SIG_FIGS: usize = 4;

pub struct Artifacts {
    dir: PathBuf,
    pub hash: String,
}

impl Artifacts {
    /// Creates `dir` and writes `<command>.manifest.json` into it.
    pub fn create(dir: &Path, manifest: &RunManifest) -> Result<Artifacts, CliError> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let hash = manifest.hash();
        let mut value = serde_json::to_value(manifest).expect("manifest serializes");
        value["manifest_hash"] = hash.clone().into();
        let out = Artifacts {
            dir: dir.to_path_buf(),
            hash,
        };
        out.write(
            &format!("{}.manifest.json", manifest.command),
            pretty(&value),
        )?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, text: String) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(CliError::io(&path))
    }

    fn comment(&self) -> String {
        format!("# manifest {}\n", self.hash)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(self.comment().into_bytes());
        let fail = |e: csv::Error| CliError::Config(format!("writing {name}: {e}"));
        w.write_record(header).map_err(fail)?;
        for row in rows {
            w.write_record(row).map_err(fail)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Config(format!("writing {name}: {e}")))?;
        self.write(name, String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Writes `value` with a top-level `manifest_hash` field.
    pub fn json(&self, name: &str, value: impl Serialize) -> Result<(), CliError> {
        let mut v = serde_json::to_value(value).expect("outputs serialize");
        match v.as_object_mut() {
            Some(obj) => {
                obj.insert("manifest_hash".into(), self.hash.clone().into());
            }
            None => v = serde_json::json!({ "manifest_hash": self.hash, "data": v }),
        }
        self.write(name, pretty(&v))
    }

    pub fn jsonl(
        &self,
        name: &str,
        lines: impl IntoIterator<Item = String>,
    ) -> Result<(), CliError> {
        let mut text = self.comment();
        for l in lines {
            text.push_str(&l);
            text.push('\n');
        }
        self.write(name, text)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<(), CliError> {
        self.write(name, format!("{}{body}", self.comment()))
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn money_table(v: &ExtMoney) -> String {
    v.format_significant(TABLE_SIG_FIGS)
}

pub fn money_csv(v: &ExtMoney) -> String {
    v.to_full_precision_string()
}

pub fn percent_table(f: &Fraction) -> String {
    format!("{}%", f.percent().format_significant(TABLE_SIG_FIGS))
}

pub fn percent_csv(f: &Fraction) -> String {
    f.percent().to_full_precision_string()
}

/// Left-aligns the first column and right-aligns the rest.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate().take(cols) {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(&mut header.iter().copied());
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * cols.saturating_sub(1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
        out.push('\n');
    }
    out
}

/// Indices of the `n` smallest finite values, ties broken by position.
pub fn lowest(values: &[&ExtMoney], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len())
        .filter(|&i| values[i].is_finite())
        .collect();
    idx.sort_by(|&a, &b| values[a].cmp(values[b]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}
