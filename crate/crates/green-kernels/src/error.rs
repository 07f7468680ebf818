use schrodinger_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("retained-mode tail {tail:.3e} exceeds tail_tol {tol:.3e}; raise k_max")]
    TailTooLarge { tail: f64, tol: f64 },
    #[error("invalid parameter {name}: {reason}")]
    BadParameter { name: &'static str, reason: String },
    #[error("kernel kind {got} does not match {expected}")]
    KindMismatch { expected: &'static str, got: String },
    #[error("fitted decay rate for {form} is not positive")]
    NonPositiveDecay { form: String },
    #[error("no admissible pairs for the envelope fit")]
    NoPairs,
    #[error("kernels live on different grids")]
    GridMismatch,
    #[error("spectral data carries no grid")]
    MissingGrid,
}

pub type Result<T> = std::result::Result<T, KernelError>;
