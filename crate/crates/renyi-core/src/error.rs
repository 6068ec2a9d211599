use thiserror::Error;

/// Errors for state validation, loading and numerical routines.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("subsystem dims {dims:?} are invalid: {reason}")]
    BadDims { dims: Vec<usize>, reason: String },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("not Hermitian: max |M - M^dag| = {residual:.3e} exceeds {tol:.1e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },

    #[error("trace {trace:.12} violates {constraint}")]
    BadTrace { trace: f64, constraint: String },

    #[error("probability vector invalid at index {index}: {reason}")]
    BadProbability { index: usize, reason: String },

    #[error("matrix has no support (zero within cutoff)")]
    ZeroMatrix,

    #[error("invalid Renyi order alpha = {alpha} for kind {kind}: {reason}")]
    BadAlpha {
        alpha: f64,
        kind: String,
        reason: String,
    },

    #[error("state file field `{field}`: {reason}")]
    FileFormat { field: String, reason: String },

    #[error("json parse error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("problem size exceeds limit: {0}")]
    SizeLimit(String),

    #[error("block decomposition invalid: {0}")]
    BadBlocks(String),

    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },
}
