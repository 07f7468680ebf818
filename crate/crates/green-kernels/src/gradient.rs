use faer::Mat;
use schrodinger_core::{Boundary, LatticeGrid};

use crate::error::{KernelError, Result};
use crate::kernel::{KernelKind, KernelMatrix};

/// `∇_x K(x,y)` as two dense component kernels.
#[derive(Debug, Clone)]
pub struct GradientKernel {
    pub gx: Mat<f64>,
    pub gy: Mat<f64>,
}

impl GradientKernel {
    pub fn norm_at(&self, i: usize, j: usize) -> f64 {
        self.gx[(i, j)].hypot(self.gy[(i, j)])
    }

    /// `|∇_x K|` packaged for the envelope fitter.
    pub fn norm_kernel(&self, source: &KernelMatrix) -> KernelMatrix {
        let n = self.gx.nrows();
        KernelMatrix::new(
            KernelKind::GradientNorm,
            source.params().clone(),
            source.grid().cloned(),
            source.weight(),
            Mat::from_fn(n, n, |i, j| self.norm_at(i, j)),
        )
    }
}

/// Central differences in the first argument. Dirichlet edges use one-sided
/// stencils; periodic grids wrap.
pub fn green_gradient(k: &KernelMatrix, grid: &LatticeGrid) -> Result<GradientKernel> {
    match k.kind() {
        KernelKind::Green | KernelKind::GreenTruncated | KernelKind::QuantumGreen | KernelKind::QuantumGreenPartial => {}
        other => {
            return Err(KernelError::KindMismatch {
                expected: "green or quantum_green",
                got: other.name(),
            })
        }
    }
    if k.dim() != grid.sites() {
        return Err(KernelError::GridMismatch);
    }
    let n = grid.n();
    let a = grid.spacing();
    let periodic = grid.boundary() == Boundary::Periodic;
    let e = k.entries();
    // stencil along one axis: (lo, hi, divisor)
    let stencil = |c: usize| -> (usize, usize, f64) {
        if periodic {
            ((c + n - 1) % n, (c + 1) % n, 2.0 * a)
        } else if c == 0 {
            (0, 1, a)
        } else if c == n - 1 {
            (n - 2, n - 1, a)
        } else {
            (c - 1, c + 1, 2.0 * a)
        }
    };
    let dim = grid.sites();
    let mut gx = Mat::<f64>::zeros(dim, dim);
    let mut gy = Mat::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let (ix, iy) = grid.unindex(i);
        let (xl, xh, dx) = stencil(ix);
        let (yl, yh, dy) = stencil(iy);
        let (il, ih) = (grid.index(xl, iy), grid.index(xh, iy));
        let (jl, jh) = (grid.index(ix, yl), grid.index(ix, yh));
        for j in 0..dim {
            gx[(i, j)] = (e[(ih, j)] - e[(il, j)]) / dx;
            gy[(i, j)] = (e[(jh, j)] - e[(jl, j)]) / dy;
        }
    }
    Ok(GradientKernel { gx, gy })
}
