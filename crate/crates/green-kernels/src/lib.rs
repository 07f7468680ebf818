//! Kernels of the trapped Hamiltonian: `G`, `G_N`, `e^{-th}`, `𝒢_ν`, their
//! gradients, translation-invariant references and decay-envelope fits.

pub mod banded;
pub mod bounds;
pub mod error;
pub mod gradient;
pub mod homogeneous;
pub mod kernel;
pub mod special;
pub mod spectral_kernels;
pub mod tgap;

pub use banded::BandedGreen;
pub use bounds::{fit_decay_bound, fit_decay_bound_detailed, fit_heat_samples, BoundFit, EnvelopeForm, FitOptions, FitSample, HeatSample};
pub use error::{KernelError, Result};
pub use gradient::{green_gradient, GradientKernel};
pub use homogeneous::{homogeneous_kernel, lattice_dispersion, HomogeneousKernel};
pub use kernel::{Cutoff, KernelKind, KernelMatrix, KernelParams};
pub use spectral_kernels::{
    diagonal_with, discarded_tail, green, heat_kernel, quantum_green, quantum_green_diagonal, quantum_weight,
    spectral_kernel, TAIL_TOL,
};
pub use tgap::{riemann_trace_gap, TraceGap};
