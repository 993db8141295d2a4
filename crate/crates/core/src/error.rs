use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid party structure: {0}")]
    InvalidStructure(String),

    #[error("total dimension {dim} exceeds the configured bound {max}")]
    DimensionBound { dim: usize, max: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("eigensolver did not converge (residual {residual:e})")]
    EigenConvergence { residual: f64 },

    #[error("solver did not converge after {iterations} iterations (best gap {best_gap:e})")]
    NonConvergence { iterations: usize, best_gap: f64 },

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
