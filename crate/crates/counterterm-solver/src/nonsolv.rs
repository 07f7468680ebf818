//! Least-squares attempt at `v^ε ∗ α = τ^ε`.

use faer::{Mat, Side};

use field_interactions::{InteractionPotentialSpec, LatticeInteraction};
use schrodinger_core::{assemble_hamiltonian, build_grid, spectral_decompose, Boundary, LatticeGrid, PotentialSpec};
use serde::{Deserialize, Serialize};

use crate::density::tau_field;
use crate::error::{CountertermError, Result};

/// `α` is sought among lattice modes of wavenumber at most `BAND · π/ε`,
/// the scale `v^ε` resolves. Without this the finite convolution matrix is
/// invertible and every target is hit exactly.
pub const DEFAULT_BAND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DemoPotential {
    /// Periodic grid, `U ≡ 1`.
    Homogeneous,
    /// Dirichlet grid, step trap `1 + floor(|x|)^θ`.
    Step { theta: f64 },
    /// Target replaced by `v^ε ∗ β` for an admissible `β`.
    Constructed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonsolvabilityReport {
    pub potential_kind: DemoPotential,
    pub epsilons: Vec<f64>,
    /// `‖v^ε∗α - τ^ε‖₂ / ‖τ^ε‖₂` at the optimal `α`.
    pub residuals: Vec<f64>,
    /// `‖α - β‖₂ / ‖β‖₂`, constructed case only.
    pub alpha_errors: Option<Vec<f64>>,
}

/// Real lattice modes with wavenumber `|p| ≤ p_max`: sine products on a
/// Dirichlet grid, cosines and sines on a periodic one. Columns are
/// normalised in `ℓ²`.
pub fn admissible_basis(grid: &LatticeGrid, p_max: f64) -> Vec<Vec<f64>> {
    let n = grid.n();
    let side = 2.0 * grid.half_width();
    let pi = std::f64::consts::PI;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut push = |f: &dyn Fn(usize, usize) -> f64| {
        let col: Vec<f64> = (0..grid.sites())
            .map(|i| {
                let (ix, iy) = grid.unindex(i);
                f(ix, iy)
            })
            .collect();
        let norm = col.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            basis.push(col.iter().map(|c| c / norm).collect());
        }
    };
    match grid.boundary() {
        Boundary::Dirichlet => {
            for m in 1..=n {
                for l in 1..=n {
                    let p = pi / side * ((m * m + l * l) as f64).sqrt();
                    if p <= p_max {
                        let t = pi / (n + 1) as f64;
                        push(&|ix, iy| (t * (m * (ix + 1)) as f64).sin() * (t * (l * (iy + 1)) as f64).sin());
                    }
                }
            }
        }
        Boundary::Periodic => {
            let half = n as isize / 2;
            for m in 0..=half {
                for l in -half..=half {
                    if m == 0 && l < 0 {
                        continue;
                    }
                    let p = 2.0 * pi / side * ((m * m + l * l) as f64).sqrt();
                    if p <= p_max {
                        let t = 2.0 * pi / n as f64;
                        let phase = move |ix: usize, iy: usize| t * (m as f64 * ix as f64 + l as f64 * iy as f64);
                        push(&|ix, iy| phase(ix, iy).cos());
                        if m != 0 || l != 0 {
                            push(&|ix, iy| phase(ix, iy).sin());
                        }
                    }
                }
            }
        }
    }
    basis
}

/// Minimise `‖v∗α - target‖₂` over `α` in the span of `basis`. Returns `α`
/// and the relative residual.
pub fn least_squares_alpha(grid: &LatticeGrid, v: &LatticeInteraction, target: &[f64], basis: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let k = basis.len();
    if k == 0 {
        return Err(CountertermError::BadParameter {
            name: "basis",
            reason: "no admissible modes".into(),
        });
    }
    let images: Vec<Vec<f64>> = basis.iter().map(|b| v.convolve(grid, b)).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let gram = Mat::<f64>::from_fn(k, k, |i, j| dot(&images[i], &images[j]));
    let rhs: Vec<f64> = images.iter().map(|c| dot(c, target)).collect();
    let eig = gram
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| CountertermError::BadParameter {
            name: "basis",
            reason: format!("normal equations failed: {e:?}"),
        })?;
    let s = eig.S();
    let q = eig.U();
    let smax = (0..k).map(|i| s[i].abs()).fold(0.0, f64::max);
    let mut coef = vec![0.0; k];
    for j in 0..k {
        if s[j] <= 1e-14 * smax {
            continue;
        }
        let c = (0..k).map(|i| q[(i, j)] * rhs[i]).sum::<f64>() / s[j];
        for i in 0..k {
            coef[i] += c * q[(i, j)];
        }
    }
    let mut alpha = vec![0.0; grid.sites()];
    let mut fit = vec![0.0; grid.sites()];
    for ((b, img), c) in basis.iter().zip(&images).zip(&coef) {
        for x in 0..alpha.len() {
            alpha[x] += c * b[x];
            fit[x] += c * img[x];
        }
    }
    let num = fit.iter().zip(target).map(|(f, t)| (f - t).powi(2)).sum::<f64>().sqrt();
    let den = dot(target, target).sqrt();
    Ok((alpha, num / den))
}

/// Residual curve of the least-squares problem over a descending ε sweep.
pub fn nonsolvability_demo(
    kind: DemoPotential,
    half_width: f64,
    n: usize,
    kappa: f64,
    epsilons: &[f64],
    band: f64,
) -> Result<NonsolvabilityReport> {
    let boundary = match kind {
        DemoPotential::Homogeneous => Boundary::Periodic,
        _ => Boundary::Dirichlet,
    };
    let grid = build_grid(half_width, n, boundary)?;
    let a = grid.spacing();
    if let Some(e) = epsilons.iter().find(|e| **e < 4.0 * a) {
        return Err(CountertermError::BadParameter {
            name: "epsilons",
            reason: format!("ε = {e} is below 4a = {}", 4.0 * a),
        });
    }
    let u = match kind {
        DemoPotential::Step { theta } => schrodinger_core::eval_potential(&PotentialSpec::step(theta, 0.9, kappa), &grid)?,
        _ => vec![1.0; grid.sites()],
    };
    let sd = spectral_decompose(&assemble_hamiltonian(&grid, &u, kappa)?, grid.sites(), 1e-8, 1.5)?;
    let mut sorted = epsilons.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let mut residuals = Vec::new();
    let mut alpha_errors = Vec::new();
    for &eps in &sorted {
        let v = InteractionPotentialSpec::bump(eps).discretize(a)?;
        let basis = admissible_basis(&grid, band * std::f64::consts::PI / eps);
        let beta = constructed_beta(&grid, &basis);
        let target = match kind {
            DemoPotential::Constructed => v.convolve(&grid, &beta),
            _ => tau_field(&sd, &grid, &v),
        };
        let (alpha, res) = least_squares_alpha(&grid, &v, &target, &basis)?;
        residuals.push(res);
        if kind == DemoPotential::Constructed {
            let num: f64 = alpha.iter().zip(&beta).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let den: f64 = beta.iter().map(|y| y * y).sum::<f64>().sqrt();
            alpha_errors.push(num / den);
        }
    }
    Ok(NonsolvabilityReport {
        potential_kind: kind,
        epsilons: sorted,
        residuals,
        alpha_errors: (kind == DemoPotential::Constructed).then_some(alpha_errors),
    })
}

/// `β` for the constructed case: the first few admissible modes with
/// decreasing weights.
fn constructed_beta(grid: &LatticeGrid, basis: &[Vec<f64>]) -> Vec<f64> {
    let mut beta = vec![0.0; grid.sites()];
    for (k, b) in basis.iter().take(4).enumerate() {
        let c = 1.0 / (1.0 + k as f64);
        for x in 0..beta.len() {
            beta[x] += c * b[x];
        }
    }
    beta
}
