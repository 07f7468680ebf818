use thiserror::Error;

#[derive(Debug, Error)]
pub enum GibbsError {
    #[error("non-finite interaction value at sample {index}: {value}")]
    NonFinite { index: u64, value: f64 },
    #[error("batch too small: {got} samples, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("normaliser ζ̂ = {zeta} is within 4σ ({stderr}) of zero")]
    UnusableNormaliser { zeta: f64, stderr: f64 },
    #[error("invalid points: {0}")]
    BadPoints(String),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Field(#[from] field_interactions::FieldError),
}

pub type Result<T> = std::result::Result<T, GibbsError>;
