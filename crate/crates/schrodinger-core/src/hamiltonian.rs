use faer::Mat;

use crate::error::{CoreError, Result};
use crate::grid::LatticeGrid;

/// `h = κ + (-Δ_lattice)/2 + U` in 5-point stencil form.
///
/// Only the diagonal is stored; every stencil neighbour carries the same
/// off-diagonal entry `-1/(2a^2)`, so the matrix is symmetric by construction.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    grid: LatticeGrid,
    diag: Vec<f64>,
    off: f64,
    kappa: f64,
}

pub fn assemble_hamiltonian(grid: &LatticeGrid, potential: &[f64], kappa: f64) -> Result<OperatorMatrix> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(CoreError::BadKappa(kappa));
    }
    if potential.len() != grid.sites() {
        return Err(CoreError::TableShape {
            expected: grid.sites(),
            got: potential.len(),
        });
    }
    if potential.iter().any(|u| !(*u >= 0.0) || !u.is_finite()) {
        return Err(CoreError::BadPotential {
            name: "potential",
            reason: "must be nonnegative and finite".into(),
        });
    }
    let w = grid.weight();
    let diag = potential.iter().map(|u| kappa + u + 2.0 / w).collect();
    Ok(OperatorMatrix {
        grid: grid.clone(),
        diag,
        off: -0.5 / w,
        kappa,
    })
}

impl OperatorMatrix {
    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> f64 {
        self.off
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Potential recovered from the diagonal.
    pub fn potential(&self) -> Vec<f64> {
        let w = self.grid.weight();
        self.diag.iter().map(|d| d - self.kappa - 2.0 / w).collect()
    }

    /// `y = h x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim() {
            let mut acc = self.diag[i] * x[i];
            for j in self.grid.neighbours(i) {
                acc += self.off * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut m = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for j in self.grid.neighbours(i) {
                m[(i, j)] += self.off;
            }
        }
        m
    }

    /// Copy with the diagonal shifted by a field (used for `U -> U + δU`).
    pub fn with_potential(&self, potential: &[f64]) -> Result<OperatorMatrix> {
        assemble_hamiltonian(&self.grid, potential, self.kappa)
    }
}
