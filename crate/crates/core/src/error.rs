use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance matrix is not positive semi-definite: {0}")]
    NotPositiveSemiDefinite(String),

    #[error("length mismatch: need at least {needed} values, got {got}")]
    LengthMismatch { needed: usize, got: usize },

    #[error("series has zero variance")]
    DegenerateSeries,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-positive value {value} at scale {scale}; filter before fitting")]
    NonPositiveValue { scale: f64, value: f64 },

    #[error("unsupported component: {0}")]
    UnsupportedComponent(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::NotPositiveSemiDefinite(_) => 1,
            _ => 2,
        }
    }
}
