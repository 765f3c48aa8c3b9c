use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("conflicting duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("symmetric eigensolver did not converge")]
    NoConvergence,

    #[error("state is not normalized: norm^2 = {0}")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("norm bound {bound} is below the spectral norm {norm}")]
    NormBoundTooSmall { bound: f64, norm: f64 },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("statevector backend needs {needed} qubits, cap is {cap}; use the analytic backend")]
    QubitCapExceeded { needed: u32, cap: u32 },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("value exceeds double precision range: {0}")]
    NumericRange(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
