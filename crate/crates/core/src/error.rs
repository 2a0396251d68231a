use thiserror::Error;

/// Errors raised by state, channel and region constructions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid subsystem layout: {0}")]
    Layout(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("negative eigenvalue {0:e} beyond tolerance")]
    NegativeEigenvalue(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("dimension cap exceeded: {dim} > {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
