use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("resistance tensor is not symmetric (off-diagonal mismatch {mismatch:e})")]
    NotSymmetric { mismatch: f64 },
    #[error("resistance tensor is not elliptic (smallest eigenvalue {min_eigenvalue:e})")]
    NotElliptic { min_eigenvalue: f64 },
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("interface weight must be nonnegative, got {0}")]
    NegativeWeight(f64),
    #[error("unknown forcing preset '{0}'")]
    UnknownPreset(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("solutions live on different grids: {0}")]
    GridMismatch(String),
    #[error("unknown manufactured case '{0}'")]
    UnknownCase(String),
    #[error("manufactured case '{case}' is inconsistent: {detail}")]
    OracleFailure { case: String, detail: String },
}
