use cost_of_pass::analysis::AnalysisError;
use cost_of_pass::metrics::MetricError;
use cost_of_pass::statistics::{BootstrapError, FitError};
use thiserror::Error;

/// Failures a command can end with. Each maps to one exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("registry has {} violation(s):\n{}", .0.len(), .0.join("\n"))]
    Validation(Vec<String>),
    #[error("{path}: {} bad line(s):\n{}", .errors.len(), .errors.join("\n"))]
    Ingest { path: String, errors: Vec<String> },
    #[error("{0}")]
    MissingData(String),
    #[error("missing cells (strategy, problem) in dataset {dataset}: {}", .pairs.iter().map(|(s, p)| format!("({s}, {p})")).collect::<Vec<_>>().join(", "))]
    MissingCells {
        dataset: String,
        pairs: Vec<(String, String)>,
    },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_)
            | CliError::Validation(_)
            | CliError::Ingest { .. }
            | CliError::Io { .. } => 2,
            CliError::MissingData(_) | CliError::MissingCells { .. } => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.as_ref().display().to_string();
        move |source| CliError::Io { path, source }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::EmptyCell { .. }
            | MetricError::MissingCell { .. }
            | MetricError::NoProblems
            | MetricError::EmptyDates
            | MetricError::MissingPriceSheet(_)
            | MetricError::MissingExpertProfile { .. } => CliError::MissingData(e.to_string()),
            MetricError::UnsortedDates => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Metric(m) => m.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<BootstrapError> for CliError {
    fn from(e: BootstrapError) -> Self {
        match e {
            BootstrapError::Metric(m) => m.into(),
            BootstrapError::Analysis(a) => a.into(),
            BootstrapError::EmptyCell { .. } => CliError::MissingData(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::Numeric(e.to_string())
    }
}
