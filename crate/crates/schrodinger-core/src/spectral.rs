use faer::{Mat, MatRef, Side};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::banded::BandCholesky;
use crate::error::{CoreError, Result};
use crate::grid::{Boundary, LatticeGrid};
use crate::hamiltonian::OperatorMatrix;

/// Largest dimension handled by the dense eigensolver (n = 80).
pub const DENSE_LIMIT: usize = 6400;

/// Eigenpairs of `h`, ascending, with eigenvectors normalized under the
/// lattice inner product `a^2 sum u_j u_k = δ_jk`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    grid: Option<LatticeGrid>,
    weight: f64,
    dim: usize,
    eigenvalues: Vec<f64>,
    vectors: Mat<f64>,
    s: f64,
    trace_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralMeta {
    pub dim: usize,
    pub count_retained: usize,
    pub weight: f64,
    pub trace_exponent_s: f64,
    pub trace_h_minus_s: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub checksum: String,
}

impl SpectralData {
    fn new(grid: Option<LatticeGrid>, weight: f64, dim: usize, eigenvalues: Vec<f64>, vectors: Mat<f64>, s: f64) -> Self {
        let trace_s = eigenvalues.iter().map(|l| l.powf(-s)).sum();
        Self {
            grid,
            weight,
            dim,
            eigenvalues,
            vectors,
            s,
            trace_s,
        }
    }

    pub fn grid(&self) -> Option<&LatticeGrid> {
        self.grid.as_ref()
    }

    /// Quadrature weight `a^2`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Dimension of the underlying space (number of sites).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_complete(&self) -> bool {
        self.count() == self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Sites x modes, lattice-normalized.
    pub fn vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    pub fn mode(&self, k: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.vectors[(i, k)]).collect()
    }

    pub fn trace_exponent(&self) -> f64 {
        self.s
    }

    /// Lattice-truncated `sum_k λ_k^{-s}` over the retained modes.
    pub fn trace_h_minus_s(&self) -> f64 {
        self.trace_s
    }

    /// Keep only the first `k` modes.
    pub fn truncated(&self, k: usize) -> SpectralData {
        let k = k.min(self.count());
        let vectors = self.vectors.as_ref().subcols(0, k).to_owned();
        SpectralData::new(self.grid.clone(), self.weight, self.dim, self.eigenvalues[..k].to_vec(), vectors, self.s)
    }

    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for l in &self.eigenvalues {
            h.update(l.to_le_bytes());
        }
        for k in 0..self.count() {
            for i in 0..self.dim {
                h.update(self.vectors[(i, k)].to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn meta(&self) -> SpectralMeta {
        SpectralMeta {
            dim: self.dim,
            count_retained: self.count(),
            weight: self.weight,
            trace_exponent_s: self.s,
            trace_h_minus_s: self.trace_s,
            lambda_min: self.eigenvalues.first().copied().unwrap_or(f64::NAN),
            lambda_max: self.eigenvalues.last().copied().unwrap_or(f64::NAN),
            checksum: self.checksum(),
        }
    }

    /// Rebuild from stored parts (used when loading persisted data).
    pub fn from_parts(grid: Option<LatticeGrid>, weight: f64, eigenvalues: Vec<f64>, vectors: Mat<f64>, s: f64) -> Self {
        let dim = vectors.nrows();
        SpectralData::new(grid, weight, dim, eigenvalues, vectors, s)
    }

    /// Largest relative residual `||h u - λ u|| / λ` over the retained modes.
    pub fn max_residual(&self, h: &OperatorMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        let mut hu = vec![0.0; self.dim];
        for k in 0..self.count() {
            let u = self.mode(k);
            h.apply(&u, &mut hu);
            let lam = self.eigenvalues[k];
            let r: f64 = hu.iter().zip(&u).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
            let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max(r / (nu * lam.abs()));
        }
        worst
    }
}

/// Decompose the Hamiltonian, retaining the lowest `k_max` modes.
///
/// Dense decomposition up to [`DENSE_LIMIT`] sites; above that a
/// shift-invert Lanczos iteration on the banded Cholesky factor.
pub fn spectral_decompose(h: &OperatorMatrix, k_max: usize, tol_eig: f64, s: f64) -> Result<SpectralData> {
    spectral_decompose_with(h, k_max, tol_eig, s, EigenSolver::Auto)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenSolver {
    /// Dense up to [`DENSE_LIMIT`] sites, Lanczos above.
    Auto,
    Dense,
    /// Shift-invert Lanczos (Dirichlet grids only).
    Lanczos,
}

pub fn spectral_decompose_with(
    h: &OperatorMatrix,
    k_max: usize,
    tol_eig: f64,
    s: f64,
    solver: EigenSolver,
) -> Result<SpectralData> {
    let dim = h.dim();
    if k_max > dim {
        return Err(CoreError::KMaxTooLarge { k_max, dim });
    }
    let grid = h.grid().clone();
    let weight = grid.weight();
    let dense = match solver {
        EigenSolver::Auto => dim <= DENSE_LIMIT || grid.boundary() == Boundary::Periodic,
        EigenSolver::Dense => true,
        EigenSolver::Lanczos => false,
    };
    let (vals, vecs) = if dense {
        dense_eigen(h.to_dense().as_ref(), k_max)?
    } else {
        lanczos_shift_invert(h, k_max, tol_eig)?
    };
    let mut vectors = vecs;
    let scale = 1.0 / weight.sqrt();
    for k in 0..vectors.ncols() {
        fix_sign(&mut vectors, k);
        for i in 0..dim {
            vectors[(i, k)] *= scale;
        }
    }
    let data = SpectralData::new(Some(grid), weight, dim, vals, vectors, s);
    check_residuals(&data, h, tol_eig)?;
    Ok(data)
}

/// Decompose a dense symmetric matrix directly (no grid), with unit-norm
/// columns rescaled by `1/sqrt(weight)`.
pub fn decompose_symmetric(m: MatRef<'_, f64>, weight: f64, k_max: usize, tol_eig: f64, s: f64) -> Result<SpectralData> {
    let dim = m.nrows();
    if k_max > dim {
        return Err(CoreError::KMaxTooLarge { k_max, dim });
    }
    let (vals, mut vecs) = dense_eigen(m, k_max)?;
    for k in 0..vecs.ncols() {
        fix_sign(&mut vecs, k);
    }
    let mv = m * vecs.as_ref();
    // indefinite toys may have eigenvalues near zero: measure against the norm
    let norm = vals.iter().fold(0.0f64, |a, l| a.max(l.abs())).max(f64::MIN_POSITIVE);
    for (k, &lam) in vals.iter().enumerate() {
        let r: f64 = (0..dim).map(|i| (mv[(i, k)] - lam * vecs[(i, k)]).powi(2)).sum::<f64>().sqrt();
        let rel = r / norm;
        if !(rel <= tol_eig) {
            return Err(CoreError::NoConvergence { index: k, residual: rel });
        }
    }
    let scale = 1.0 / weight.sqrt();
    for k in 0..vecs.ncols() {
        for i in 0..dim {
            vecs[(i, k)] *= scale;
        }
    }
    Ok(SpectralData::new(None, weight, dim, vals, vecs, s))
}

fn dense_eigen(m: MatRef<'_, f64>, k_max: usize) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| CoreError::NoConvergence { index: 0, residual: f64::NAN })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let vals: Vec<f64> = (0..k_max).map(|k| s[k]).collect();
    let vecs = u.subcols(0, k_max).to_owned();
    Ok((vals, vecs))
}

/// Deterministic sign convention: the largest-magnitude entry is positive.
fn fix_sign(v: &mut Mat<f64>, k: usize) {
    let n = v.nrows();
    let mut best = 0usize;
    for i in 0..n {
        if v[(i, k)].abs() > v[(best, k)].abs() + 1e-12 {
            best = i;
        }
    }
    if v[(best, k)] < 0.0 {
        for i in 0..n {
            v[(i, k)] = -v[(i, k)];
        }
    }
}

fn check_residuals(data: &SpectralData, h: &OperatorMatrix, tol_eig: f64) -> Result<()> {
    let mut hu = vec![0.0; data.dim];
    for k in 0..data.count() {
        let u = data.mode(k);
        h.apply(&u, &mut hu);
        let lam = data.eigenvalues[k];
        let r: f64 = hu.iter().zip(&u).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rel = r / (nu * lam.abs());
        if !(rel <= tol_eig) {
            return Err(CoreError::NoConvergence { index: k, residual: rel });
        }
    }
    Ok(())
}

/// Lowest `k` eigenpairs through Lanczos on `h^{-1}` with full
/// reorthogonalization. Restarts from scratch with a larger Krylov space
/// until every requested pair meets `tol`.
fn lanczos_shift_invert(h: &OperatorMatrix, k: usize, tol: f64) -> Result<(Vec<f64>, Mat<f64>)> {
    let dim = h.dim();
    let chol = BandCholesky::factor(h)?;
    let mut m = (2 * k + 40).min(dim);
    loop {
        let mut q = Mat::<f64>::zeros(dim, m);
        let mut alpha = vec![0.0; m];
        let mut beta = vec![0.0; m];
        // deterministic start vector
        let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + 0.5 * ((i as f64 * 0.618_033_988_7).fract() - 0.5)).collect();
        normalize(&mut v);
        let mut steps = m;
        for j in 0..m {
            for i in 0..dim {
                q[(i, j)] = v[i];
            }
            let mut w = v.clone();
            chol.solve(&mut w);
            let a: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
            alpha[j] = a;
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for c in 0..=j {
                    let dot: f64 = (0..dim).map(|i| q[(i, c)] * w[i]).sum();
                    for i in 0..dim {
                        w[i] -= dot * q[(i, c)];
                    }
                }
            }
            let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if j + 1 < m {
                if b < 1e-14 {
                    steps = j + 1;
                    break;
                }
                beta[j] = b;
                v = w.iter().map(|x| x / b).collect();
            }
        }
        let mut t = Mat::<f64>::zeros(steps, steps);
        for j in 0..steps {
            t[(j, j)] = alpha[j];
            if j + 1 < steps {
                t[(j, j + 1)] = beta[j];
                t[(j + 1, j)] = beta[j];
            }
        }
        let evd = t
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| CoreError::NoConvergence { index: 0, residual: f64::NAN })?;
        let theta = evd.S().column_vector();
        let s = evd.U();
        let take = k.min(steps);
        let mut vals = Vec::with_capacity(take);
        let mut vecs = Mat::<f64>::zeros(dim, take);
        let qs = q.as_ref().subcols(0, steps);
        let mut worst = (0usize, 0.0f64);
        let mut hu = vec![0.0; dim];
        for c in 0..take {
            // largest θ of h^{-1} is the smallest λ of h
            let idx = steps - 1 - c;
            let lam = 1.0 / theta[idx];
            let col = qs * s.col(idx);
            let mut u: Vec<f64> = (0..dim).map(|i| col[i]).collect();
            normalize(&mut u);
            h.apply(&u, &mut hu);
            let r = hu.iter().zip(&u).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt() / lam;
            if r > worst.1 {
                worst = (c, r);
            }
            vals.push(lam);
            for i in 0..dim {
                vecs[(i, c)] = u[i];
            }
        }
        if worst.1 <= tol && take == k {
            return Ok((vals, vecs));
        }
        if m == dim {
            return Err(CoreError::NoConvergence { index: worst.0, residual: worst.1 });
        }
        m = (2 * m).min(dim);
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}
