use green_kernels::KernelError;
use schrodinger_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("interaction range ε = {epsilon} is below 2a = {two_a}; unresolved on this lattice")]
    Unresolved { epsilon: f64, two_a: f64 },
    #[error("invalid parameter {name}: {reason}")]
    BadParameter { name: &'static str, reason: String },
    #[error("kernel does not match the batch: {0}")]
    Mismatch(String),
    #[error("sample {index}: V_N = {value} below the deterministic floor {floor}")]
    FloorViolation { index: u64, value: f64, floor: f64 },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FieldError>;
