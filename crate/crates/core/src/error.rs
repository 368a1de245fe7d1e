use thiserror::Error;

/// Errors raised by model construction, compilation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no valid schedule: {0}")]
    NoValidSchedule(String),
    #[error("enumeration budget exceeded: {count} assignments > {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("symmetry cuts need per-copy binaries: {0}")]
    NotPerCopy(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
