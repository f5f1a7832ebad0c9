use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("letter {letter} is outside the alphabet 1..={n}")]
    LetterOutOfRange { letter: usize, n: usize },
    #[error("enumeration would produce {requested} elements, above the cap {cap}")]
    CardinalityCap { requested: usize, cap: usize },
    #[error("model dimension {requested} exceeds the cap {cap}")]
    DimensionCap { requested: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite entry in {0}")]
    NonFinite(String),
    #[error("matrix is not Hermitian: defect {defect:e} above tolerance {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("matrix is not multi-Toeplitz on the interior: residual {residual:e} above tolerance {tol:e}")]
    NotToeplitz { residual: f64, tol: f64 },
    #[error("point is not strictly inside the polyball: {0}")]
    OutsideDomain(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { what: String, iterations: usize, residual: f64 },
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("malformed polynomial file: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
