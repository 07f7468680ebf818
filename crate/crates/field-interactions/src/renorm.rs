use green_kernels::{homogeneous_kernel, BandedGreen, KernelKind, KernelMatrix};
use schrodinger_core::LatticeGrid;
use serde::{Deserialize, Serialize};

use crate::error::{FieldError, Result};
use crate::interaction::Interactions;
use crate::potential::{InteractionPotentialSpec, LatticeInteraction};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Renormalisation {
    /// `τ^ε(x) = ∫ v^ε(x - y) G(x,y) dy`
    pub tau: Vec<f64>,
    /// `E^ε = ½ ∫∫ v^ε G^2`
    pub e_eps: f64,
    /// `τ^{ε,0}` on the periodic companion with `U = 0`.
    pub tau0: f64,
}

/// `τ^{ε,0} = a^2 sum_z v(z) K_0(z)` with `K_0` the Green function of
/// `κ - Δ/2` on a periodic `n_c x n_c` lattice of the same spacing.
pub fn tau_homogeneous(v: &LatticeInteraction, n_c: usize, kappa: f64) -> f64 {
    let k0 = homogeneous_kernel(n_c, v.spacing(), kappa, |l| 1.0 / l);
    let w = v.spacing() * v.spacing();
    v.offsets().iter().map(|&(dx, dy, vv)| vv * k0.at(dx, dy)).sum::<f64>() * w
}

/// Renormalisation data for a Green kernel on `grid`. The homogeneous
/// reference uses the companion with `n + 1` sites, which for a Dirichlet
/// grid has exactly the same spacing and box.
pub fn tau_and_e(g: &KernelMatrix, grid: &LatticeGrid, v: &InteractionPotentialSpec, kappa: f64) -> Result<Renormalisation> {
    if g.kind() != KernelKind::Green {
        return Err(FieldError::Mismatch(format!("τ^ε needs the full Green function, got {:?}", g.kind())));
    }
    let lv = v.discretize(grid.spacing())?;
    let ev = Interactions::new(g, grid, &lv)?;
    let n_c = match grid.boundary() {
        schrodinger_core::Boundary::Dirichlet => grid.n() + 1,
        schrodinger_core::Boundary::Periodic => grid.n(),
    };
    Ok(Renormalisation {
        tau: ev.tau().to_vec(),
        e_eps: ev.e_eps(),
        tau0: tau_homogeneous(&lv, n_c, kappa),
    })
}

/// `τ^ε` at selected sites from banded Green columns (large grids).
pub fn tau_at_sites(banded: &BandedGreen, v: &LatticeInteraction, sites: &[usize]) -> Vec<f64> {
    let grid = banded.grid();
    let w = grid.weight();
    sites
        .iter()
        .map(|&x| {
            let col = banded.column(x);
            v.neighbours(grid, x).iter().map(|&(y, vv)| vv * col[y]).sum::<f64>() * w
        })
        .collect()
}
