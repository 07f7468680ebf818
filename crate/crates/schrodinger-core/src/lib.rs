//! Lattice discretization of the trapped one-particle Hamiltonian
//! `h = κ - Δ/2 + U` on a square box, and its spectral decomposition.

pub mod banded;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod persist;
pub mod potential;
pub mod spectral;

pub use banded::BandCholesky;
pub use error::{CoreError, Result};
pub use grid::{Boundary, LatticeGrid};
pub use hamiltonian::{assemble_hamiltonian, OperatorMatrix};
pub use potential::{eval_potential, verify_growth_assumption, GrowthReport, PotentialKind, PotentialSpec};
pub use spectral::{
    decompose_symmetric, spectral_decompose, spectral_decompose_with, EigenSolver, SpectralData, SpectralMeta, DENSE_LIMIT,
};

/// Build a grid (thin wrapper kept for symmetry with the other operations).
pub fn build_grid(half_width: f64, n: usize, boundary: Boundary) -> Result<LatticeGrid> {
    LatticeGrid::new(half_width, n, boundary)
}
