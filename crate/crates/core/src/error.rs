use thiserror::Error;

/// Errors raised by estimation, selection and classification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data for scale: need at least 2 observations, got {0}")]
    InsufficientData(usize),

    #[error("group `{group}` has {size} observation(s); at least 2 are required")]
    GroupTooSmall { group: String, size: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A matrix that had to be inverted (or evaluated on the log-det scale)
    /// is not positive definite.
    #[error("not computable: {0}")]
    NotComputable(String),

    #[error("regularization required: covariance input is singular and no penalty was given")]
    RegularizationRequired,

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("unsupported model version `{0}`")]
    UnknownVersion(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
