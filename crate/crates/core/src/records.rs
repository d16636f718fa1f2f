//! Canonical data model for datasets, problems, strategies and attempts, plus
//! the registry that ties them together.
//!
//! A registry is loaded from a bundle directory holding one TOML file per
//! collection (`datasets.toml`, `problems.toml`, `strategies.toml`,
//! `price_sheets.toml`, `expert_profiles.toml`, `providers.toml`,
//! `fx_rates.toml`). Attempt records arrive separately as JSONL and are
//! appended with [`Registry::ingest_attempts`]. Once built, a registry is
//! read-only and can be shared across threads.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::grading;
use crate::harness::ProviderConfig;
use crate::money::Money;
use crate::pricing::{ExpertProfile, FxRate, PriceSheet};

/// Release date carried by expert strategies so they are present at every
/// point of a timeline.
pub const EXPERT_EPOCH: NaiveDate = match NaiveDate::from_ymd_opt(1970, 1, 1) {
    Some(d) => d,
    None => panic!("invalid epoch"),
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskCategory {
    BasicQuantitative,
    KnowledgeBased,
    ComplexQuantitative,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraderKind {
    MultipleChoice,
    Numeric,
    FreeResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    pub id: String,
    pub task_category: TaskCategory,
    pub grader_kind: GraderKind,
    /// Number of options; required for multiple-choice datasets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_count: Option<u32>,
    /// Absolute tolerance for numeric grading. Absent means exact equality.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric_tolerance: Option<Money>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    pub dataset_id: String,
    pub problem_id: String,
    pub input_text: String,
    pub reference_answer: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Model,
    Expert,
    TechniqueModified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lightweight,
    Large,
    Reasoning,
    Expert,
    Other,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Lightweight => "lightweight",
            Family::Large => "large",
            Family::Reasoning => "reasoning",
            Family::Expert => "expert",
            Family::Other => "other",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn expert_epoch() -> NaiveDate {
    EXPERT_EPOCH
}

/// A producer of answers: a model pipeline, a human-expert profile, or a
/// model pipeline wrapped in an inference-time technique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Strategy {
    pub id: String,
    pub kind: StrategyKind,
    pub family: Family,
    #[serde(default = "expert_epoch")]
    pub release_date: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_sheet_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_strategy_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider_config_id: Option<String>,
    /// Technique label shared by all strategies modified the same way.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub technique: Option<String>,
    /// Marks baselines such as random guessers that `--exclude-impractical`
    /// removes before frontier computation.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub impractical: bool,
}

impl Strategy {
    pub fn is_expert(&self) -> bool {
        self.kind == StrategyKind::Expert
    }

    /// A plain model strategy; handy for fixtures.
    pub fn model(id: &str, family: Family, release_date: NaiveDate) -> Strategy {
        Strategy {
            id: id.to_string(),
            kind: StrategyKind::Model,
            family,
            release_date,
            price_sheet_id: None,
            base_strategy_id: None,
            provider_config_id: None,
            technique: None,
            impractical: false,
        }
    }

    pub fn expert(id: &str) -> Strategy {
        Strategy {
            id: id.to_string(),
            kind: StrategyKind::Expert,
            family: Family::Expert,
            release_date: EXPERT_EPOCH,
            price_sheet_id: None,
            base_strategy_id: None,
            provider_config_id: None,
            technique: None,
            impractical: false,
        }
    }

    pub fn technique_of(id: &str, base: &Strategy, technique: &str) -> Strategy {
        Strategy {
            id: id.to_string(),
            kind: StrategyKind::TechniqueModified,
            family: base.family,
            release_date: base.release_date,
            price_sheet_id: base.price_sheet_id.clone(),
            base_strategy_id: Some(base.id.clone()),
            provider_config_id: None,
            technique: Some(technique.to_string()),
            impractical: false,
        }
    }
}

/// One inference attempt by one strategy on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttemptRecord {
    pub strategy_id: String,
    pub dataset_id: String,
    pub problem_id: String,
    pub attempt_index: u32,
    pub correct: bool,
    pub input_tokens: u64,
    pub output_tokens: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_resources: Option<BTreeMap<String, Money>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_override: Option<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl AttemptRecord {
    pub fn to_jsonl_line(&self) -> String {
        serde_json::to_string(self).expect("attempt records always serialize")
    }

    pub fn cell_key(&self) -> CellKey {
        CellKey {
            strategy_id: self.strategy_id.clone(),
            dataset_id: self.dataset_id.clone(),
            problem_id: self.problem_id.clone(),
        }
    }

    fn value_errors(&self) -> Option<String> {
        if let Some(extra) = &self.extra_resources {
            if let Some((name, _)) = extra.iter().find(|(_, q)| q.is_negative()) {
                return Some(format!("extra resource {name:?} has a negative quantity"));
            }
        }
        if self.cost_override.as_ref().is_some_and(Money::is_negative) {
            return Some("cost_override is negative".to_string());
        }
        None
    }
}

/// Identifies one (strategy, problem) cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub strategy_id: String,
    pub dataset_id: String,
    pub problem_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct AttemptKey {
    cell: CellKey,
    attempt_index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestErrorKind {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("unresolved {field} {value:?}")]
    UnresolvedReference { field: &'static str, value: String },
    #[error("duplicate attempt ({strategy_id}, {dataset_id}/{problem_id}, #{attempt_index})")]
    Duplicate {
        strategy_id: String,
        dataset_id: String,
        problem_id: String,
        attempt_index: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct IngestError {
    /// 1-based line number in the ingested text.
    pub line: usize,
    pub kind: IngestErrorKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub accepted: usize,
    pub errors: Vec<IngestError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub invariant: String,
}

impl Violation {
    fn new(entity: impl Into<String>, invariant: impl Into<String>) -> Self {
        Violation {
            entity: entity.into(),
            invariant: invariant.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.invariant)
    }
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {message}")]
    Parse { path: String, message: String },
    #[error("duplicate {collection} id {id:?}")]
    Duplicate {
        collection: &'static str,
        id: String,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetsFile {
    #[serde(default)]
    datasets: Vec<DatasetRef>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemsFile {
    #[serde(default)]
    problems: Vec<ProblemInstance>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategiesFile {
    #[serde(default)]
    strategies: Vec<Strategy>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriceSheetsFile {
    #[serde(default)]
    price_sheets: Vec<PriceSheet>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpertProfilesFile {
    #[serde(default)]
    expert_profiles: Vec<ExpertProfile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProvidersFile {
    #[serde(default)]
    providers: Vec<ProviderConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FxRatesFile {
    #[serde(default)]
    fx_rates: Vec<FxRate>,
}

/// File names of the registry bundle, in load order.
pub const BUNDLE_FILES: [&str; 7] = [
    "datasets.toml",
    "problems.toml",
    "strategies.toml",
    "price_sheets.toml",
    "expert_profiles.toml",
    "providers.toml",
    "fx_rates.toml",
];

fn read_collection<T: DeserializeOwned + Default>(
    dir: &Path,
    name: &str,
) -> Result<T, RegistryError> {
    let path = dir.join(name);
    if !path.exists() {
        return Ok(T::default());
    }
    let text = fs::read_to_string(&path).map_err(|source| RegistryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| RegistryError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn insert_unique<T>(
    map: &mut IndexMap<String, T>,
    collection: &'static str,
    id: String,
    value: T,
) -> Result<(), RegistryError> {
    if map.contains_key(&id) {
        return Err(RegistryError::Duplicate { collection, id });
    }
    map.insert(id, value);
    Ok(())
}

/// Every keyed collection the analyses draw from, in file order.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    pub datasets: IndexMap<String, DatasetRef>,
    /// Keyed by (dataset_id, problem_id).
    pub problems: IndexMap<(String, String), ProblemInstance>,
    pub strategies: IndexMap<String, Strategy>,
    pub price_sheets: IndexMap<String, PriceSheet>,
    pub expert_profiles: IndexMap<String, ExpertProfile>,
    pub providers: IndexMap<String, ProviderConfig>,
    pub fx_rates: Vec<FxRate>,
    attempts: Vec<AttemptRecord>,
    attempt_keys: HashSet<AttemptKey>,
    cells: HashMap<CellKey, Vec<usize>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a bundle directory. Missing files are empty collections.
    pub fn load_bundle(dir: impl AsRef<Path>) -> Result<Registry, RegistryError> {
        let dir = dir.as_ref();
        let mut reg = Registry::new();
        let datasets: DatasetsFile = read_collection(dir, BUNDLE_FILES[0])?;
        for d in datasets.datasets {
            reg.add_dataset(d)?;
        }
        let problems: ProblemsFile = read_collection(dir, BUNDLE_FILES[1])?;
        for p in problems.problems {
            reg.add_problem(p)?;
        }
        let strategies: StrategiesFile = read_collection(dir, BUNDLE_FILES[2])?;
        for s in strategies.strategies {
            reg.add_strategy(s)?;
        }
        let sheets: PriceSheetsFile = read_collection(dir, BUNDLE_FILES[3])?;
        for s in sheets.price_sheets {
            reg.add_price_sheet(s)?;
        }
        let experts: ExpertProfilesFile = read_collection(dir, BUNDLE_FILES[4])?;
        for e in experts.expert_profiles {
            reg.add_expert_profile(e)?;
        }
        let providers: ProvidersFile = read_collection(dir, BUNDLE_FILES[5])?;
        for p in providers.providers {
            reg.add_provider(p)?;
        }
        let fx: FxRatesFile = read_collection(dir, BUNDLE_FILES[6])?;
        reg.fx_rates = fx.fx_rates;
        Ok(reg)
    }

    pub fn add_dataset(&mut self, d: DatasetRef) -> Result<(), RegistryError> {
        insert_unique(&mut self.datasets, "dataset", d.id.clone(), d)
    }

    pub fn add_problem(&mut self, p: ProblemInstance) -> Result<(), RegistryError> {
        let key = (p.dataset_id.clone(), p.problem_id.clone());
        if self.problems.contains_key(&key) {
            return Err(RegistryError::Duplicate {
                collection: "problem",
                id: format!("{}/{}", key.0, key.1),
            });
        }
        self.problems.insert(key, p);
        Ok(())
    }

    pub fn add_strategy(&mut self, s: Strategy) -> Result<(), RegistryError> {
        insert_unique(&mut self.strategies, "strategy", s.id.clone(), s)
    }

    pub fn add_price_sheet(&mut self, s: PriceSheet) -> Result<(), RegistryError> {
        insert_unique(&mut self.price_sheets, "price sheet", s.id.clone(), s)
    }

    pub fn add_expert_profile(&mut self, e: ExpertProfile) -> Result<(), RegistryError> {
        insert_unique(&mut self.expert_profiles, "expert profile", e.id.clone(), e)
    }

    pub fn add_provider(&mut self, p: ProviderConfig) -> Result<(), RegistryError> {
        insert_unique(&mut self.providers, "provider", p.id.clone(), p)
    }

    pub fn problem(&self, dataset_id: &str, problem_id: &str) -> Option<&ProblemInstance> {
        self.problems
            .get(&(dataset_id.to_string(), problem_id.to_string()))
    }

    /// Problems of one dataset in registry order.
    pub fn dataset_problems(&self, dataset_id: &str) -> Vec<&ProblemInstance> {
        self.problems
            .values()
            .filter(|p| p.dataset_id == dataset_id)
            .collect()
    }

    pub fn attempts(&self) -> &[AttemptRecord] {
        &self.attempts
    }

    /// Attempts of one cell, in ingestion order.
    pub fn cell_attempts(
        &self,
        strategy_id: &str,
        dataset_id: &str,
        problem_id: &str,
    ) -> Vec<&AttemptRecord> {
        let key = CellKey {
            strategy_id: strategy_id.to_string(),
            dataset_id: dataset_id.to_string(),
            problem_id: problem_id.to_string(),
        };
        self.cells
            .get(&key)
            .map(|idx| idx.iter().map(|&i| &self.attempts[i]).collect())
            .unwrap_or_default()
    }

    /// Expert profile for a given expert strategy on a dataset.
    pub fn expert_profile_for(
        &self,
        strategy_id: &str,
        dataset_id: &str,
    ) -> Option<&ExpertProfile> {
        self.expert_profiles
            .values()
            .find(|p| p.strategy_id == strategy_id && p.dataset_id == dataset_id)
    }

    /// Parses and appends attempt records from JSONL text. Blank lines and
    /// `#` comment lines are ignored. Bad lines are reported with their line
    /// number and skipped; the rest are kept.
    pub fn ingest_attempts(&mut self, text: &str) -> IngestReport {
        let mut report = IngestReport::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match self.ingest_line(line) {
                Ok(()) => report.accepted += 1,
                Err(kind) => report.errors.push(IngestError {
                    line: line_no,
                    kind,
                }),
            }
        }
        report
    }

    fn ingest_line(&mut self, line: &str) -> Result<(), IngestErrorKind> {
        let record: AttemptRecord =
            serde_json::from_str(line).map_err(|e| IngestErrorKind::Schema(e.to_string()))?;
        self.push_attempt(record)
    }

    /// Appends one already-parsed record under the same checks as ingestion.
    pub fn push_attempt(&mut self, record: AttemptRecord) -> Result<(), IngestErrorKind> {
        if let Some(msg) = record.value_errors() {
            return Err(IngestErrorKind::InvalidValue(msg));
        }
        if !self.strategies.contains_key(&record.strategy_id) {
            return Err(IngestErrorKind::UnresolvedReference {
                field: "strategy_id",
                value: record.strategy_id,
            });
        }
        if !self.datasets.contains_key(&record.dataset_id) {
            return Err(IngestErrorKind::UnresolvedReference {
                field: "dataset_id",
                value: record.dataset_id,
            });
        }
        if self
            .problem(&record.dataset_id, &record.problem_id)
            .is_none()
        {
            return Err(IngestErrorKind::UnresolvedReference {
                field: "problem_id",
                value: format!("{}/{}", record.dataset_id, record.problem_id),
            });
        }
        let key = AttemptKey {
            cell: record.cell_key(),
            attempt_index: record.attempt_index,
        };
        if self.attempt_keys.contains(&key) {
            return Err(IngestErrorKind::Duplicate {
                strategy_id: record.strategy_id,
                dataset_id: record.dataset_id,
                problem_id: record.problem_id,
                attempt_index: record.attempt_index,
            });
        }
        let idx = self.attempts.len();
        self.cells.entry(key.cell.clone()).or_default().push(idx);
        self.attempt_keys.insert(key);
        self.attempts.push(record);
        Ok(())
    }
}

/// Checks every registry invariant; an empty result means the registry is
/// consistent.
pub fn validate_registry(reg: &Registry) -> Vec<Violation> {
    let mut out = Vec::new();

    for d in reg.datasets.values() {
        let entity = format!("dataset:{}", d.id);
        if d.id.trim().is_empty() {
            out.push(Violation::new(&entity, "id must be non-empty"));
        }
        match (d.grader_kind, d.option_count) {
            (GraderKind::MultipleChoice, None) => out.push(Violation::new(
                &entity,
                "multiple-choice dataset requires option_count",
            )),
            (GraderKind::MultipleChoice, Some(k)) if !(2..=26).contains(&k) => out.push(
                Violation::new(&entity, "option_count must be between 2 and 26"),
            ),
            (GraderKind::Numeric | GraderKind::FreeResponse, Some(_)) => out.push(Violation::new(
                &entity,
                "option_count is only allowed for multiple-choice datasets",
            )),
            _ => {}
        }
        if d.numeric_tolerance.as_ref().is_some_and(Money::is_negative) {
            out.push(Violation::new(
                &entity,
                "numeric_tolerance must be non-negative",
            ));
        }
    }

    for p in reg.problems.values() {
        let entity = format!("problem:{}/{}", p.dataset_id, p.problem_id);
        if p.problem_id.trim().is_empty() {
            out.push(Violation::new(&entity, "problem_id must be non-empty"));
        }
        if p.reference_answer.trim().is_empty() {
            out.push(Violation::new(
                &entity,
                "reference_answer must be non-empty",
            ));
            continue;
        }
        match reg.datasets.get(&p.dataset_id) {
            None => out.push(Violation::new(
                &entity,
                format!("unknown dataset_id {:?}", p.dataset_id),
            )),
            Some(d) => {
                if let Err(msg) = grading::check_reference(&p.reference_answer, d) {
                    out.push(Violation::new(&entity, msg));
                }
            }
        }
    }

    for s in reg.strategies.values() {
        let entity = format!("strategy:{}", s.id);
        if s.id.trim().is_empty() {
            out.push(Violation::new(&entity, "id must be non-empty"));
        }
        if (s.family == Family::Expert) != (s.kind == StrategyKind::Expert) {
            out.push(Violation::new(
                &entity,
                "family is expert iff kind is expert",
            ));
        }
        if s.is_expert() && s.release_date != EXPERT_EPOCH {
            out.push(Violation::new(
                &entity,
                "expert strategies carry the epoch release date 1970-01-01",
            ));
        }
        match (&s.kind, &s.base_strategy_id) {
            (StrategyKind::TechniqueModified, None) => out.push(Violation::new(
                &entity,
                "technique_modified strategy requires base_strategy_id",
            )),
            (StrategyKind::TechniqueModified, Some(base)) => match reg.strategies.get(base) {
                None => out.push(Violation::new(
                    &entity,
                    format!("unknown base_strategy_id {base:?}"),
                )),
                Some(b) if b.kind != StrategyKind::Model => out.push(Violation::new(
                    &entity,
                    format!("base strategy {base:?} must be a model strategy"),
                )),
                Some(_) => {}
            },
            (_, Some(_)) => out.push(Violation::new(
                &entity,
                "base_strategy_id is only allowed for technique_modified strategies",
            )),
            _ => {}
        }
        if !s.is_expert() {
            match &s.price_sheet_id {
                None => out.push(Violation::new(&entity, "missing price_sheet_id")),
                Some(id) if !reg.price_sheets.contains_key(id) => out.push(Violation::new(
                    &entity,
                    format!("dangling price_sheet_id {id:?}"),
                )),
                Some(_) => {}
            }
        }
        if let Some(pid) = &s.provider_config_id {
            if !reg.providers.contains_key(pid) {
                out.push(Violation::new(
                    &entity,
                    format!("dangling provider_config_id {pid:?}"),
                ));
            }
        }
    }

    for sheet in reg.price_sheets.values() {
        let entity = format!("price_sheet:{}", sheet.id);
        for msg in sheet.invariant_violations() {
            out.push(Violation::new(&entity, msg));
        }
    }

    for e in reg.expert_profiles.values() {
        let entity = format!("expert_profile:{}", e.id);
        for msg in e.invariant_violations() {
            out.push(Violation::new(&entity, msg));
        }
        match reg.strategies.get(&e.strategy_id) {
            None => out.push(Violation::new(
                &entity,
                format!("unknown strategy_id {:?}", e.strategy_id),
            )),
            Some(s) if !s.is_expert() => out.push(Violation::new(
                &entity,
                format!("strategy {:?} is not an expert", e.strategy_id),
            )),
            Some(_) => {}
        }
        if !reg.datasets.contains_key(&e.dataset_id) {
            out.push(Violation::new(
                &entity,
                format!("unknown dataset_id {:?}", e.dataset_id),
            ));
        }
    }
    let mut seen_profiles = HashSet::new();
    for e in reg.expert_profiles.values() {
        if !seen_profiles.insert((&e.strategy_id, &e.dataset_id)) {
            out.push(Violation::new(
                format!("expert_profile:{}", e.id),
                format!("second profile for ({}, {})", e.strategy_id, e.dataset_id),
            ));
        }
    }

    for p in reg.providers.values() {
        let entity = format!("provider:{}", p.id);
        for msg in p.invariant_violations() {
            out.push(Violation::new(&entity, msg));
        }
    }

    for (i, fx) in reg.fx_rates.iter().enumerate() {
        let entity = format!("fx_rate:{i}");
        if fx.rate.is_negative() || fx.rate.is_zero() {
            out.push(Violation::new(&entity, "rate must be positive"));
        }
        if fx.base.trim().is_empty() || fx.quote.trim().is_empty() {
            out.push(Violation::new(&entity, "currency codes must be non-empty"));
        }
    }

    out
}
