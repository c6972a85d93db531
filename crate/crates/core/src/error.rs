use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sample too small: {what} needs n >= {needed}, got n = {got}")]
    TooSmall {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    #[error("degenerate variance estimate: {0}")]
    DegenerateVariance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("replicate {replicate} failed: {source}")]
    Replicate {
        replicate: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::TooSmall { .. } => "too_small",
            Error::DegenerateSample(_) => "degenerate_sample",
            Error::SingularCovariance(_) => "singular_covariance",
            Error::DegenerateVariance(_) => "degenerate_variance",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Parse { .. } => "parse",
            Error::Replicate { .. } => "replicate",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
