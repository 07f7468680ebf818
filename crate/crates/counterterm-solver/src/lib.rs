//! Counterterm fixed-point problem: given a bare trap `𝒰`, find the dressed
//! trap `U` with `Φ(U) = U`, plus its limiting form and the least-squares
//! demonstration that the local mass equation `v^ε ∗ α = τ^ε` is generally
//! unsolvable.

pub mod analysis;
pub mod density;
pub mod error;
pub mod nonsolv;
pub mod phi;
pub mod solver;

pub use analysis::{
    contraction_probe, detect_kappa0, fk_positivity, gradient_constant, loglog_slope, sandwich_constant, ContractionProbe,
};
pub use density::{green_diag_homogeneous, rho_nu, rho_nu_homogeneous, tau_field};
pub use error::{CountertermError, Result};
pub use nonsolv::{admissible_basis, least_squares_alpha, nonsolvability_demo, DemoPotential, NonsolvabilityReport, DEFAULT_BAND};
pub use phi::{CountertermProblem, PhiEval, Regime};
pub use solver::{solve_counterterm, solve_limiting, CountertermState, IterationRecord, DEFAULT_MAX_ITER, DEFAULT_TOL};
