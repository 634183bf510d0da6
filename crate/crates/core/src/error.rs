use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a unit vector: norm {norm}")]
    NotUnit { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported dimension n = {0} (only n = 1 and n = 2 are implemented)")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite or negative value: {0}")]
    NonFinite(String),

    #[error("zero jump across labelled edge between cells {0} and {1}")]
    ZeroJump(usize, usize),

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("truncation certificate violated: lhs {lhs} > rhs {rhs}")]
    CertificateViolation { lhs: f64, rhs: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
