use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the benchmark engine can report.
///
/// Variants are grouped by the stage that raises them so that run records can
/// carry a stable machine-readable `kind` next to the human message.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),

    #[error("numeric error at row {row}: {message}")]
    Numeric { row: usize, message: String },

    #[error("matrix decomposition failed: {0}")]
    Decomposition(String),

    #[error("class balance {rate:.4} outside [0.4, 0.6]")]
    Generation { rate: f64 },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("fit failed in repetition {repetition}: {source}")]
    Repetition {
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("tuning failed: {0}")]
    Tuning(String),

    #[error("ingestion failed: {0}")]
    Ingestion(String),

    #[error("report failed: {0}")]
    Report(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier used in CLI output and failed run records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Numeric { .. } => "numeric",
            Error::Decomposition(_) => "decomposition",
            Error::Generation { .. } => "generation",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::Fit(_) => "fit",
            Error::Repetition { .. } => "fit",
            Error::Schema(_) => "schema",
            Error::Argument(_) => "argument",
            Error::Precondition(_) => "precondition",
            Error::Tuning(_) => "tuning",
            Error::Ingestion(_) => "ingestion",
            Error::Report(_) => "report",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
