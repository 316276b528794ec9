use std::path::PathBuf;

use coarse_core::{ComposeError, DoubleError, FundamentalError, MetricError, OrderError};

/// Process exit codes.
pub mod exit {
    /// Holds, equivalent, valid, or the command succeeded.
    pub const OK: i32 = 0;
    /// Usage, IO, schema or precondition errors.
    pub const ERROR: i32 = 1;
    /// Fails, not equivalent, invalid input, or a failed check.
    pub const NEGATIVE: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u64, expected: u64 },
    #[error("expected a {expected} document, found {found}")]
    SchemaKind { expected: &'static str, found: String },
    #[error("{field}[{row}][{col}] = {value} exceeds the cap of {cap} quanta")]
    Overflow { field: &'static str, row: usize, col: usize, value: i128, cap: u64 },
    #[error("{field}[{row}][{col}] = {value} is negative")]
    Negative { field: &'static str, row: usize, col: usize, value: i128 },
    #[error("{field} row {row} has {found} entries, expected {expected}")]
    Ragged { field: &'static str, row: usize, expected: usize, found: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Double(#[from] DoubleError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Fundamental(#[from] FundamentalError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Negative { .. } | CliError::Metric(MetricError::NotAMetric { .. }) => exit::NEGATIVE,
            CliError::Double(DoubleError::Invalid(_)) => exit::NEGATIVE,
            CliError::Fundamental(
                FundamentalError::Inconclusive { .. }
                | FundamentalError::TooFewSurvivors { .. }
                | FundamentalError::BoundedWitness { .. },
            ) => exit::INCONCLUSIVE,
            CliError::Order(OrderError::LadderTooShort { .. }) => exit::INCONCLUSIVE,
            _ => exit::ERROR,
        }
    }
}
