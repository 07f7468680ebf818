//! Reweighted estimators for the interacting field: `ζ = E[e^{-V}]`, the
//! correlation functions `γ_p`, their Wick-ordered versions `γ̂_p`, the free
//! correlations `γ⁰_p` and the decay weight `Υ_θ`.

pub mod corr;
pub mod error;
pub mod ibp;
pub mod ratio;
pub mod toy;
pub mod wick;

pub use corr::{corr_estimate, mixed_moment, CorrelationAccumulator, CorrelationEstimate, InteractionTag};
pub use error::{GibbsError, Result};
pub use ibp::{ibp_corr_check, IbpEvaluator, IbpForm, IbpReport};
pub use ratio::{partition_estimate, ComplexEstimate, Estimate, RatioAccumulator, DEFAULT_BLOCKS};
pub use wick::{combination_terms, free_corr, monomial, permanent, upsilon, upsilon_symmetrised, wick_monomial, PointTuple};
