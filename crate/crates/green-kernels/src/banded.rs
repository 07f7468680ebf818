use schrodinger_core::{BandCholesky, LatticeGrid, OperatorMatrix};

use crate::error::Result;

/// Columns of `G = h^{-1}` on large Dirichlet grids without a dense inverse.
#[derive(Debug, Clone)]
pub struct BandedGreen {
    chol: BandCholesky,
    grid: LatticeGrid,
}

impl BandedGreen {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        Ok(Self {
            chol: BandCholesky::factor(h)?,
            grid: h.grid().clone(),
        })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    /// `G(·, y_j)` in continuum normalization (matrix inverse over `a^2`).
    pub fn column(&self, j: usize) -> Vec<f64> {
        let w = self.grid.weight();
        let mut col = self.chol.inverse_column(j);
        for v in &mut col {
            *v /= w;
        }
        col
    }
}
