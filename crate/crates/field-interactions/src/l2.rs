//! Exact `L^2(P)` distances between Wick-ordered interactions, from the
//! fourth-moment Wick contractions.
//!
//! For `V_A = ½ a^4 sum v_A :|φ_A(x)|^2 |φ_A(x~)|^2:` and similarly `V_B`,
//! with cross covariance `C(x,y) = E[φ_A(x) φ̄_B(y)]`,
//!
//! `E[V_A V_B] = ½ a^8 sum v_A(x,x~) v_B(y,y~) C_xy C_x~y~ (C_xy C_x~y~ + C_xy~ C_x~y)`.

use faer::Mat;
use green_kernels::{green, Cutoff, KernelMatrix, TAIL_TOL};
use schrodinger_core::{LatticeGrid, SpectralData};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::interaction::Interactions;
use crate::potential::LatticeInteraction;

/// Sparse symmetric two-body weights: per site, `(j, v(x_i, x_j))`.
pub type SparseV = Vec<Vec<(usize, f64)>>;

pub fn stencil_of(v: &LatticeInteraction, grid: &LatticeGrid) -> SparseV {
    v.stencil(grid)
}

/// `E[V_A V_B]` for weights `v_a`, `v_b`, cross covariance `c` and site weight `w = a^2`.
pub fn cross_moment(c: &Mat<f64>, w: f64, v_a: &SparseV, v_b: &SparseV) -> f64 {
    let n = c.nrows();
    let q = Mat::from_fn(n, n, |i, j| c[(i, j)] * c[(i, j)]);
    // T = V_B Q
    let mut t = Mat::<f64>::zeros(n, n);
    for (y, nb) in v_b.iter().enumerate() {
        for &(yt, vv) in nb {
            for col in 0..n {
                t[(y, col)] += vv * q[(yt, col)];
            }
        }
    }
    let qt = &q * &t;
    let mut term1 = 0.0;
    for (x, nb) in v_a.iter().enumerate() {
        for &(xt, vv) in nb {
            term1 += vv * qt[(x, xt)];
        }
    }
    let mut term2 = 0.0;
    let mut p = vec![0.0; n];
    for (x, nb) in v_a.iter().enumerate() {
        for &(xt, va) in nb {
            for y in 0..n {
                p[y] = c[(x, y)] * c[(xt, y)];
            }
            let mut acc = 0.0;
            for (y, nby) in v_b.iter().enumerate() {
                if p[y] == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for &(yt, vb) in nby {
                    inner += vb * p[yt];
                }
                acc += p[y] * inner;
            }
            term2 += va * acc;
        }
    }
    0.5 * w.powi(4) * (term1 + term2)
}

fn dense(k: &KernelMatrix) -> Mat<f64> {
    k.entries().to_owned()
}

/// `‖V_M - V_N‖` under the coupling `φ_M = φ_N + ψ` with `ψ` independent,
/// so that `E[φ_M(x) φ̄_N(y)] = G_N(x,y)`.
pub fn l2_truncation(
    spectral: &SpectralData,
    grid: &LatticeGrid,
    v: &LatticeInteraction,
    n: f64,
    m: f64,
    cutoff: Cutoff,
) -> Result<f64> {
    let sv = stencil_of(v, grid);
    let gn = dense(&green(spectral, Some(n), cutoff, TAIL_TOL)?);
    let gm = dense(&green(spectral, Some(m), cutoff, TAIL_TOL)?);
    Ok(l2_truncation_from_kernels(&gn, &gm, grid.weight(), &sv))
}

/// Same as [`l2_truncation`] from dense `G_N`, `G_M`.
pub fn l2_truncation_from_kernels(gn: &Mat<f64>, gm: &Mat<f64>, w: f64, sv: &SparseV) -> f64 {
    let mnn = cross_moment(gn, w, sv, sv);
    let mmm = cross_moment(gm, w, sv, sv);
    // cross covariance of the coupled pair is G_N
    let mnm = cross_moment(gn, w, sv, sv);
    (mmm + mnn - 2.0 * mnm).max(0.0).sqrt()
}

/// `‖W^ε - V^ε‖`. The difference is the centred quadratic form
/// `sum M_xy φ̄_x φ_y` with `M = a^4 v^ε G - a^2 diag(τ^ε)`, whose variance
/// under the complex Gaussian measure is `tr (M G M G)`.
pub fn l2_w_minus_v(g: &KernelMatrix, grid: &LatticeGrid, v: &LatticeInteraction) -> Result<f64> {
    let ev = Interactions::new(g, grid, v)?;
    let w = grid.weight();
    let n = grid.sites();
    let mut mm = Mat::<f64>::zeros(n, n);
    for (i, nb) in v.stencil(grid).iter().enumerate() {
        for &(j, vv) in nb {
            mm[(i, j)] += w * w * vv * g.get(i, j);
        }
        mm[(i, i)] -= w * ev.tau()[i];
    }
    let mg = &mm * g.entries();
    let mut tr = 0.0;
    for i in 0..n {
        for j in 0..n {
            tr += mg[(i, j)] * mg[(j, i)];
        }
    }
    Ok(tr.max(0.0).sqrt())
}

/// `‖V^ε - V‖` with `V` the local lattice interaction, both on the same field.
pub fn l2_eps_local(g: &KernelMatrix, grid: &LatticeGrid, v: &LatticeInteraction) -> Result<f64> {
    let c = dense(g);
    let w = grid.weight();
    let se = v.stencil(grid);
    let sl = LatticeInteraction::local(grid.spacing()).stencil(grid);
    let ee = cross_moment(&c, w, &se, &se);
    let ll = cross_moment(&c, w, &sl, &sl);
    let el = cross_moment(&c, w, &se, &sl);
    Ok((ee + ll - 2.0 * el).max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pair", rename_all = "snake_case")]
pub enum L2Pair {
    /// `(V_N^ε, V_M^ε)`
    Truncation { n: f64, m: f64, cutoff: Cutoff },
    /// `(V^ε, W^ε)`
    WMinusV,
    /// `(V^ε, V)`
    EpsLocal,
}

pub fn l2_distance_exact(spectral: &SpectralData, grid: &LatticeGrid, v: &LatticeInteraction, pair: L2Pair) -> Result<f64> {
    match pair {
        L2Pair::Truncation { n, m, cutoff } => l2_truncation(spectral, grid, v, n, m, cutoff),
        L2Pair::WMinusV => l2_w_minus_v(&green(spectral, None, Cutoff::Exp, TAIL_TOL)?, grid, v),
        L2Pair::EpsLocal => l2_eps_local(&green(spectral, None, Cutoff::Exp, TAIL_TOL)?, grid, v),
    }
}
