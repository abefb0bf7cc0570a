use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("order {lambda} is not dual-summable in dimension {dim} (need 2*lambda > d)")]
    NotSummable { lambda: f64, dim: usize },

    #[error("insufficient decay certificate: {0}")]
    InsufficientDecay(String),

    #[error("empty control dictionary")]
    EmptyDictionary,

    #[error("non-finite state at step {step}")]
    Diverged { step: usize },

    #[error("CFL condition still violated after {substeps} substeps at time level {level}")]
    Cfl { level: usize, substeps: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
