//! Diagnostics around the fixed point: contraction factor, first-step
//! size, sandwich and gradient constants, Feynman–Kac signs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schrodinger_core::LatticeGrid;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::phi::{CountertermProblem, PhiEval};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionProbe {
    pub kappa: f64,
    pub radius: f64,
    pub ratios: Vec<f64>,
    /// `max` of the ratios.
    pub q: f64,
}

/// `‖Φ(u₁) - Φ(u₂)‖_𝒰 / ‖u₁ - u₂‖_𝒰` for random pairs `u = 𝒰(1 + r ξ)`,
/// `ξ` uniform in `[-1, 1]` per site.
pub fn contraction_probe(problem: &CountertermProblem, pairs: usize, radius: f64, seed: u64) -> Result<ContractionProbe> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bare = problem.bare();
    let mut draw = || -> Vec<f64> { bare.iter().map(|u| u * (1.0 + radius * rng.random_range(-1.0..1.0))).collect() };
    let mut ratios = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let (u1, u2) = (draw(), draw());
        let p1 = problem.apply(&u1, 0)?.image;
        let p2 = problem.apply(&u2, 0)?.image;
        ratios.push(problem.distance(&p1, &p2) / problem.distance(&u1, &u2));
    }
    let q = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ContractionProbe {
        kappa: problem.kappa(),
        radius,
        ratios,
        q,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `C = max(sup U/𝒰, sup 𝒰/U)`, the smallest constant with
/// `𝒰/C ≤ U ≤ C𝒰`.
pub fn sandwich_constant(u: &[f64], bare: &[f64]) -> f64 {
    u.iter()
        .zip(bare)
        .map(|(a, b)| (a / b).max(b / a))
        .fold(0.0, f64::max)
}

/// `sup |∇U| / g̃^{3/2}` over interior sites by central differences.
pub fn gradient_constant(u: &[f64], grid: &LatticeGrid, g_tilde: impl Fn([f64; 2]) -> f64) -> f64 {
    let n = grid.n();
    let a = grid.spacing();
    let mut sup: f64 = 0.0;
    for iy in 1..n - 1 {
        for ix in 1..n - 1 {
            let i = grid.index(ix, iy);
            let gx = (u[grid.index(ix + 1, iy)] - u[grid.index(ix - 1, iy)]) / (2.0 * a);
            let gy = (u[grid.index(ix, iy + 1)] - u[grid.index(ix, iy - 1)]) / (2.0 * a);
            sup = sup.max(gx.hypot(gy) / g_tilde(grid.position(i)).powf(1.5));
        }
    }
    sup
}

/// `(min (τ⁰ - τ), min (ρ⁰ - ρ))`; both are nonnegative for confining `U`
/// and `v ≥ 0`.
pub fn fk_positivity(eval: &PhiEval) -> (f64, f64) {
    let t = eval.tau.iter().map(|t| eval.tau0 - t).fold(f64::INFINITY, f64::min);
    let r = eval.rho.iter().map(|r| eval.rho0 - r).fold(f64::INFINITY, f64::min);
    (t, r)
}

/// Smallest κ of an ascending list at which the iteration contracts, i.e.
/// residuals decrease monotonically from iteration 2 on.
pub fn detect_kappa0(
    kappas: &[f64],
    mut solve: impl FnMut(f64) -> Result<crate::CountertermState>,
) -> Option<f64> {
    kappas
        .iter()
        .copied()
        .find(|&k| matches!(solve(k), Ok(s) if s.converged && s.monotone_after(2)))
}
