use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid needs n >= 8 points per side, got {0}")]
    TooFewPoints(usize),
    #[error("half width must be positive and finite, got {0}")]
    BadHalfWidth(f64),
    #[error("invalid potential parameter `{name}`: {reason}")]
    BadPotential { name: &'static str, reason: String },
    #[error("tabulated potential has {got} values, grid has {expected} sites")]
    TableShape { expected: usize, got: usize },
    #[error("kappa must be positive, got {0}")]
    BadKappa(f64),
    #[error("k_max = {k_max} exceeds the dimension {dim}")]
    KMaxTooLarge { k_max: usize, dim: usize },
    #[error("eigensolver did not converge for eigenpair {index} (relative residual {residual:e})")]
    NoConvergence { index: usize, residual: f64 },
    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("metadata error: {0}")]
    Metadata(String),
    #[error("checksum mismatch for {0}")]
    Checksum(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
