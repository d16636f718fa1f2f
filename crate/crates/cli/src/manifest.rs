//! Provenance record written next to every command's outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cost_of_pass::records::BUNDLE_FILES;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Registry bundle directory followed by any records files.
    pub config_paths: Vec<String>,
    pub seed: Option<u64>,
    pub output_dir: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// sha256 over the bundle files and records files, in the order above.
    pub input_hash: String,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hashes each input file's name, length and bytes. Missing bundle files are
/// skipped since the loader treats them as empty.
pub fn hash_inputs(registry: &Path, records: &[PathBuf]) -> Result<String, CliError> {
    let mut h = Sha256::new();
    let mut add = |label: &str, path: &Path| -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(CliError::io(path))?;
        h.update(label.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
        Ok(())
    };
    for name in BUNDLE_FILES {
        let path = registry.join(name);
        if path.exists() {
            add(name, &path)?;
        }
    }
    for (i, path) in records.iter().enumerate() {
        add(&format!("records#{i}"), path)?;
    }
    Ok(hex(&h.finalize()))
}

impl RunManifest {
    pub fn new(
        command: &str,
        registry: &Path,
        records: &[PathBuf],
        out: &Path,
    ) -> Result<RunManifest, CliError> {
        let mut config_paths = vec![registry.display().to_string()];
        config_paths.extend(records.iter().map(|p| p.display().to_string()));
        Ok(RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_paths,
            seed: None,
            output_dir: out.display().to_string(),
            parameters: BTreeMap::new(),
            input_hash: hash_inputs(registry, records)?,
        })
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.parameters.insert(key.to_string(), v);
    }

    /// sha256 of the canonical JSON form (keys sorted, no whitespace).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("manifest serializes");
        hex(&Sha256::digest(&bytes))
    }
}
