use green_kernels::{homogeneous_kernel, quantum_green_diagonal, quantum_weight};
use field_interactions::LatticeInteraction;
use schrodinger_core::{Boundary, LatticeGrid, SpectralData};

use crate::error::{CountertermError, Result};

/// `ρ_ν(x) = 𝒢_ν(x,x)`, the mean particle density.
pub fn rho_nu(spectral: &SpectralData, nu: f64) -> Result<Vec<f64>> {
    if !(nu > 0.0) {
        return Err(CountertermError::BadParameter {
            name: "nu",
            reason: format!("must be positive, got {nu}"),
        });
    }
    Ok(quantum_green_diagonal(spectral, nu))
}

/// Size of the periodic companion with the same spacing and box.
pub fn companion_size(grid: &LatticeGrid) -> usize {
    match grid.boundary() {
        Boundary::Dirichlet => grid.n() + 1,
        Boundary::Periodic => grid.n(),
    }
}

/// `ρ_ν⁰`: the density for `U = 0` on the periodic companion (a constant).
pub fn rho_nu_homogeneous(grid: &LatticeGrid, kappa: f64, nu: f64) -> f64 {
    homogeneous_kernel(companion_size(grid), grid.spacing(), kappa, |l| quantum_weight(l, nu, 0.0)).diagonal()
}

/// `G_0(x,x)` for `U = 0` on the periodic companion.
pub fn green_diag_homogeneous(grid: &LatticeGrid, kappa: f64) -> f64 {
    homogeneous_kernel(companion_size(grid), grid.spacing(), kappa, |l| 1.0 / l).diagonal()
}

/// `τ(x) = a^2 sum_y v(x - y) G(x,y)` with `G` summed from the full
/// spectrum.
pub fn tau_field(spectral: &SpectralData, grid: &LatticeGrid, v: &LatticeInteraction) -> Vec<f64> {
    let vec = spectral.vectors();
    let lam = spectral.eigenvalues();
    let w = grid.weight();
    (0..grid.sites())
        .map(|x| {
            v.neighbours(grid, x)
                .iter()
                .map(|&(y, vv)| vv * (0..lam.len()).map(|k| vec[(x, k)] * vec[(y, k)] / lam[k]).sum::<f64>())
                .sum::<f64>()
                * w
        })
        .collect()
}
