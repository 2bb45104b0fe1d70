use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("unbounded")]
    Unbounded,

    #[error("origin is not strictly interior to the body")]
    NotInterior,

    #[error("point is not in the body")]
    NotInBody,

    #[error("rejection infeasible: acceptance rate {rate:e} over {draws} pilot draws")]
    RejectionInfeasible { rate: f64, draws: usize },

    #[error("use estimated path: exact hull volume is only available for d <= 3 (got d = {0})")]
    UseEstimatedPath(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported body kind for {0}")]
    Unsupported(&'static str),

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("config error: {0}")]
    Config(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
