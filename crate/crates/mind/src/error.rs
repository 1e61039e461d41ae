use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum MindError {
    /// A numeric argument is outside its admissible domain (e.g. `q < 1`).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two objects that must live on the same grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An estimator configuration is inconsistent (e.g. the universal
    /// threshold constant is below its admissible minimum).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A desk-scale routine was asked for a problem size above its cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input data (CSV/JSON parse failures).
    #[error("parse error: {0}")]
    Parse(String),

    /// Invariant violation that indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, MindError>;
