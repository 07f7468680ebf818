use crate::error::{CoreError, Result};
use crate::grid::Boundary;
use crate::hamiltonian::OperatorMatrix;

/// Cholesky factor of a Dirichlet-grid Hamiltonian in band storage.
///
/// With row-major site ordering the 5-point matrix has half-bandwidth `n`,
/// so the factor costs `O(n^4)` and a solve `O(n^3)`. Since `h` is an
/// M-matrix the solves involve no cancellation and entries of `h^{-1}` keep
/// full relative accuracy far into the exponential tail.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    dim: usize,
    band: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(h: &OperatorMatrix) -> Result<Self> {
        let grid = h.grid();
        if grid.boundary() != Boundary::Dirichlet {
            return Err(CoreError::Metadata("band factorization needs a Dirichlet grid".into()));
        }
        let n = grid.n();
        let dim = h.dim();
        let b = n;
        let w = b + 1;
        let mut l = vec![0.0; dim * w];
        let diag = h.diag();
        let off = h.off_diagonal();
        let a_entry = |i: usize, j: usize| -> f64 {
            if i == j {
                diag[i]
            } else if (j + 1 == i && i % n != 0) || j + n == i {
                off
            } else {
                0.0
            }
        };
        for i in 0..dim {
            let lo = i.saturating_sub(b);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(b));
                let mut s = a_entry(i, j);
                let ri = i * w + b - i;
                let rj = j * w + b - j;
                for k in klo..j {
                    s -= l[ri + k] * l[rj + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(CoreError::NotPositiveDefinite(i));
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Ok(Self { dim, band: b, l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.band + 1) + self.band + j - i]
    }

    /// Solve `h x = rhs` in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        self.solve_from(rhs, 0);
    }

    /// Solve in place when `rhs[..start]` is known to vanish.
    pub fn solve_from(&self, x: &mut [f64], start: usize) {
        let b = self.band;
        for i in start..self.dim {
            let lo = i.saturating_sub(b).max(start);
            let mut s = x[i];
            for k in lo..i {
                s -= self.at(i, k) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
        for i in (0..self.dim).rev() {
            let hi = (i + b).min(self.dim - 1);
            let mut s = x[i];
            for k in i + 1..=hi {
                s -= self.at(k, i) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
    }

    /// Column `j` of `h^{-1}` (matrix inverse, no lattice weight).
    pub fn inverse_column(&self, j: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        x[j] = 1.0;
        self.solve_from(&mut x, j);
        x
    }
}
