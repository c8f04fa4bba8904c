use thiserror::Error;

/// Errors raised by the numerical routines and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: ‖H − H*‖ = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("eigensolver did not converge on {fingerprint}")]
    NoConvergence { fingerprint: String },

    #[error("function is undefined at spectrum point {point}")]
    UndefinedAt { point: f64 },

    #[error("Schatten exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("kernel index set does not match the decomposition: {0}")]
    SpectrumMismatch(String),

    #[error("semigroup time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("kernel diagonal must be identically one, found defect {defect:e}")]
    NotUnital { defect: f64 },

    #[error("{what} of size {size} exceeds the configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("index {index} out of range 0..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("function is not 1-Lipschitz: slope {slope} between {lambda} and {mu}")]
    LipschitzViolation { lambda: f64, mu: f64, slope: f64 },

    #[error("time grid is empty")]
    EmptyGrid,

    #[error("sample grid contains the origin")]
    GridContainsOrigin,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
