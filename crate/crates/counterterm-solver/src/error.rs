use thiserror::Error;

#[derive(Debug, Error)]
pub enum CountertermError {
    #[error(transparent)]
    Core(#[from] schrodinger_core::CoreError),
    #[error(transparent)]
    Kernel(#[from] green_kernels::KernelError),
    #[error(transparent)]
    Field(#[from] field_interactions::FieldError),
    #[error("iteration {iteration}: potential lost positivity at site {site} (U = {value}); κ is probably below κ₀")]
    PositivityLost { iteration: usize, site: usize, value: f64 },
    #[error("iteration {iteration}: residuals grow (ratio {ratio}); Φ is not a contraction at this κ")]
    NotContracting { iteration: usize, ratio: f64 },
    #[error("no convergence after {max_iter} iterations (residual {residual})")]
    MaxIter { max_iter: usize, residual: f64 },
    #[error("invalid parameter {name}: {reason}")]
    BadParameter { name: &'static str, reason: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CountertermError>;
