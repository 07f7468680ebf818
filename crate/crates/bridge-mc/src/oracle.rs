//! Lattice spectral values at off-grid points by bilinear interpolation,
//! for comparison with path integrals.

use green_kernels::quantum_weight;
use schrodinger_core::{Boundary, LatticeGrid, SpectralData};

use crate::error::{BridgeError, Result};

/// Interpolation stencil: up to four `(site, weight)` pairs. Outside the
/// outermost sites the Dirichlet wall contributes value 0.
pub fn bilinear_stencil(grid: &LatticeGrid, p: [f64; 2]) -> Vec<(usize, f64)> {
    let n = grid.n() as isize;
    let a = grid.spacing();
    let x0 = grid.coord(0);
    let axis = |v: f64| -> [(isize, f64); 2] {
        let s = (v - x0) / a;
        let i = s.floor();
        let f = s - i;
        [(i as isize, 1.0 - f), (i as isize + 1, f)]
    };
    let (ax, ay) = (axis(p[0]), axis(p[1]));
    let mut out = Vec::with_capacity(4);
    for &(ix, wx) in &ax {
        for &(iy, wy) in &ay {
            let w = wx * wy;
            if w == 0.0 || ix < 0 || iy < 0 || ix >= n || iy >= n {
                continue;
            }
            out.push((grid.index(ix as usize, iy as usize), w));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SpectralOracle {
    spectral: SpectralData,
    grid: LatticeGrid,
}

impl SpectralOracle {
    pub fn new(spectral: SpectralData) -> Result<Self> {
        let grid = spectral
            .grid()
            .cloned()
            .ok_or_else(|| BridgeError::BadParameter {
                name: "spectral",
                reason: "oracle needs grid-attached spectral data".into(),
            })?;
        if grid.boundary() != Boundary::Dirichlet {
            return Err(BridgeError::BadParameter {
                name: "spectral",
                reason: "oracle interpolates against Dirichlet walls".into(),
            });
        }
        Ok(Self { spectral, grid })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    fn kernel(&self, x: [f64; 2], y: [f64; 2], w: impl Fn(f64) -> f64) -> f64 {
        let sx = bilinear_stencil(&self.grid, x);
        let sy = bilinear_stencil(&self.grid, y);
        let v = self.spectral.vectors();
        let lam = self.spectral.eigenvalues();
        let mut acc = 0.0;
        for k in 0..lam.len() {
            let ux: f64 = sx.iter().map(|&(i, a)| a * v[(i, k)]).sum();
            if ux == 0.0 {
                continue;
            }
            let uy: f64 = sy.iter().map(|&(i, a)| a * v[(i, k)]).sum();
            acc += w(lam[k]) * ux * uy;
        }
        acc
    }

    /// `e^{-th}(x,y)`
    pub fn heat(&self, x: [f64; 2], y: [f64; 2], t: f64) -> f64 {
        self.kernel(x, y, |l| (-t * l).exp())
    }

    /// `𝒢_ν(x,x)`
    pub fn rho_nu(&self, x: [f64; 2], nu: f64) -> f64 {
        self.kernel(x, x, |l| quantum_weight(l, nu, 0.0))
    }
}
