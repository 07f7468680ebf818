use thiserror::Error;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("a bridge needs at least 8 steps, got {0}")]
    TooFewSteps(usize),
    #[error("invalid parameter {name}: {reason}")]
    BadParameter { name: &'static str, reason: String },
    #[error(transparent)]
    Core(#[from] schrodinger_core::CoreError),
    #[error(transparent)]
    Kernel(#[from] green_kernels::KernelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, BridgeError>;
