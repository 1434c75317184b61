use thiserror::Error;

/// Errors raised by matrix validation, the means, metrics and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:.6e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("compound order {k} out of range for dimension {n}")]
    BadOrder { k: usize, n: usize },

    #[error("negative bracket {0:.3e} under square root")]
    NegativeBracket(f64),

    #[error("power mean exponent must be nonzero; use the log-Euclidean mean for exponent 0")]
    ZeroExponent,

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("spectrum has non-negligible imaginary part {0:.3e}")]
    ComplexSpectrum(f64),

    #[error("spectrum is not positive: {0:.6e}")]
    NonPositiveSpectrum(f64),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("instance incompatible with check {check}: {reason}")]
    IncompatibleInstance { check: String, reason: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
