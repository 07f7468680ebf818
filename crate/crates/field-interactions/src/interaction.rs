//! Wick-ordered interactions `V` (local or smeared by `v^ε`) and `W^ε`.

use faer::Mat;
use green_kernels::{KernelKind, KernelMatrix};
use schrodinger_core::{LatticeGrid, SpectralData};
use serde::{Deserialize, Serialize};

use crate::error::{FieldError, Result};
use crate::potential::{InteractionPotentialSpec, LatticeInteraction};
use crate::sampler::FieldBatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteractionKind {
    #[serde(rename = "V_N")]
    VN,
    #[serde(rename = "V_eps")]
    VEps,
    #[serde(rename = "W_eps")]
    WEps,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionValue {
    pub kind: InteractionKind,
    pub n_cut: Option<f64>,
    pub epsilon: Option<f64>,
    pub values: Vec<f64>,
}

pub(crate) fn check_kernel(g: &KernelMatrix, batch: &FieldBatch) -> Result<()> {
    if g.dim() != batch.sites() {
        return Err(FieldError::Mismatch(format!("kernel dim {} vs {} sites", g.dim(), batch.sites())));
    }
    let p = g.params();
    let ok = match g.kind() {
        KernelKind::Green => batch.n_cut.is_none(),
        KernelKind::GreenTruncated => p.n_cut == batch.n_cut && p.cutoff == Some(batch.cutoff),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(FieldError::Mismatch(format!(
            "kernel {:?} (N = {:?}) vs batch N = {:?}",
            g.kind(),
            p.n_cut,
            batch.n_cut
        )))
    }
}

/// `:|φ(x)|^2: = |φ(x)|^2 - G_N(x,x)` for every sample (sites x samples).
pub fn wick_mass(batch: &FieldBatch, g: &KernelMatrix) -> Result<Mat<f64>> {
    check_kernel(g, batch)?;
    let d = g.diag();
    Ok(Mat::from_fn(batch.sites(), batch.len(), |x, s| {
        batch.re[(x, s)].powi(2) + batch.im[(x, s)].powi(2) - d[x]
    }))
}

/// Precomputed data for evaluating `V` and `W^ε` sample by sample.
#[derive(Debug, Clone)]
pub struct Interactions {
    weight: f64,
    g_diag: Vec<f64>,
    /// Per site: `(j, v(x_i - x_j), G(x_i, x_j))`.
    stencil: Vec<Vec<(usize, f64, f64)>>,
    /// `½ a^4 sum v (G_xx G_yy + G_xy^2)`
    constant: f64,
    tau: Vec<f64>,
    e_eps: f64,
    floor: f64,
    v_l1: f64,
    epsilon: f64,
}

impl Interactions {
    pub fn new(g: &KernelMatrix, grid: &LatticeGrid, v: &LatticeInteraction) -> Result<Self> {
        if g.dim() != grid.sites() {
            return Err(FieldError::Mismatch("kernel and grid sizes differ".into()));
        }
        let w = grid.weight();
        let g_diag = g.diag();
        let stencil: Vec<Vec<(usize, f64, f64)>> = (0..grid.sites())
            .map(|i| {
                v.neighbours(grid, i)
                    .into_iter()
                    .map(|(j, vv)| (j, vv, g.get(i, j)))
                    .collect()
            })
            .collect();
        let mut constant = 0.0;
        let mut e_eps = 0.0;
        let mut gg = 0.0;
        let mut tau = vec![0.0; grid.sites()];
        for (i, nb) in stencil.iter().enumerate() {
            for &(j, vv, gij) in nb {
                constant += vv * (g_diag[i] * g_diag[j] + gij * gij);
                e_eps += vv * gij * gij;
                gg += vv * g_diag[i] * g_diag[j];
                tau[i] += vv * gij;
            }
        }
        for t in &mut tau {
            *t *= w;
        }
        let s = 1.0 + v.l1();
        Ok(Self {
            weight: w,
            g_diag,
            stencil,
            constant: 0.5 * w * w * constant,
            tau,
            e_eps: 0.5 * w * w * e_eps,
            floor: -0.5 * (s * s - 1.0) * w * w * gg,
            v_l1: v.l1(),
            epsilon: v.epsilon(),
        })
    }

    /// `τ^ε(x) = a^2 sum v^ε(x - y) G(x,y)`
    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// `E^ε = ½ a^4 sum v^ε G^2`
    pub fn e_eps(&self) -> f64 {
        self.e_eps
    }

    /// Deterministic lower bound `-(S^2-1)/2 a^4 sum v G_xx G_yy`, `S = 1 + a^2 sum|v|`.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn s_constant(&self) -> f64 {
        1.0 + self.v_l1
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `V = ½ a^4 sum v(x-y) :|φ(x)|^2 |φ(y)|^2:` for sample `s`.
    pub fn v_value(&self, batch: &FieldBatch, s: usize) -> f64 {
        let n = batch.density(s);
        let mut acc = 0.0;
        for (i, nb) in self.stencil.iter().enumerate() {
            let (ri, ii) = batch.value(i, s);
            let gi = self.g_diag[i];
            for &(j, vv, gij) in nb {
                let (rj, ij) = batch.value(j, s);
                let re_cross = ri * rj + ii * ij;
                acc += vv * (n[i] * n[j] - gi * n[j] - self.g_diag[j] * n[i] - 2.0 * gij * re_cross);
            }
        }
        0.5 * self.weight * self.weight * acc + self.constant
    }

    /// `W^ε = ½ a^4 sum v :|φ|^2: :|φ|^2: - a^2 sum τ :|φ|^2: - E^ε` for sample `s`.
    pub fn w_value(&self, batch: &FieldBatch, s: usize) -> f64 {
        let m: Vec<f64> = batch
            .density(s)
            .iter()
            .zip(&self.g_diag)
            .map(|(n, g)| n - g)
            .collect();
        let mut quad = 0.0;
        let mut lin = 0.0;
        for (i, nb) in self.stencil.iter().enumerate() {
            let mut row = 0.0;
            for &(j, vv, _) in nb {
                row += vv * m[j];
            }
            quad += m[i] * row;
            lin += self.tau[i] * m[i];
        }
        0.5 * self.weight * self.weight * quad - self.weight * lin - self.e_eps
    }

    /// `V` for every sample of the batch, asserting the deterministic floor.
    pub fn v_values_checked(&self, batch: &FieldBatch) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(batch.len());
        for s in 0..batch.len() {
            let value = self.v_value(batch, s);
            // allow roundoff relative to the size of the constant part
            if value < self.floor - 1e-9 * self.constant.abs().max(1.0) {
                return Err(FieldError::FloorViolation {
                    index: batch.first_index + s as u64,
                    value,
                    floor: self.floor,
                });
            }
            out.push(value);
        }
        Ok(out)
    }

    pub fn w_values(&self, batch: &FieldBatch) -> Vec<f64> {
        (0..batch.len()).map(|s| self.w_value(batch, s)).collect()
    }
}

/// Per-sample interaction values. `V_N` uses the local lattice interaction;
/// `V_eps` and `W_eps` need a smeared `v`.
pub fn interaction_value(
    batch: &FieldBatch,
    g: &KernelMatrix,
    grid: &LatticeGrid,
    kind: InteractionKind,
    v: Option<&InteractionPotentialSpec>,
) -> Result<InteractionValue> {
    check_kernel(g, batch)?;
    let lattice_v = match (kind, v) {
        (InteractionKind::VN, None) => LatticeInteraction::local(grid.spacing()),
        (_, Some(spec)) => spec.discretize(grid.spacing())?,
        (_, None) => {
            return Err(FieldError::BadParameter {
                name: "v",
                reason: "V_eps and W_eps need an interaction potential".into(),
            })
        }
    };
    let ev = Interactions::new(g, grid, &lattice_v)?;
    let values = match kind {
        InteractionKind::WEps => ev.w_values(batch),
        _ => ev.v_values_checked(batch)?,
    };
    Ok(InteractionValue {
        kind,
        n_cut: batch.n_cut,
        epsilon: v.map(|s| s.epsilon),
        values,
    })
}

/// `C` in `V_N ≥ -C N^γ log N`, assembled as in the proof:
/// `C = (S^2-1)/2 · C' · (γ/e)^γ · tr h^{-s}` with `γ = s - 1` and
/// `C' = max_N sup_x G_N(x,x)/log N` over the cutoffs in use.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FloorConstant {
    pub s: f64,
    pub gamma: f64,
    pub s_constant: f64,
    pub c_prime: f64,
    pub trace_h_minus_s: f64,
    pub big_c: f64,
}

impl FloorConstant {
    pub fn new(spectral: &SpectralData, s_constant: f64, cutoffs: &[f64]) -> Result<Self> {
        let s = spectral.trace_exponent();
        let gamma = s - 1.0;
        if !(gamma > 0.0) || cutoffs.iter().any(|&n| !(n > 1.0)) {
            return Err(FieldError::BadParameter {
                name: "N",
                reason: "floor constant needs s > 1 and every N > 1".into(),
            });
        }
        let mut c_prime: f64 = 0.0;
        for &n in cutoffs {
            let d = green_kernels::diagonal_with(spectral, |l| (-l / n).exp() / l);
            let sup = d.iter().cloned().fold(0.0, f64::max);
            c_prime = c_prime.max(sup / n.ln());
        }
        let trace = spectral.trace_h_minus_s();
        let big_c = 0.5 * (s_constant * s_constant - 1.0) * c_prime * (gamma / std::f64::consts::E).powf(gamma) * trace;
        Ok(Self {
            s,
            gamma,
            s_constant,
            c_prime,
            trace_h_minus_s: trace,
            big_c,
        })
    }

    /// `-C N^γ log N`
    pub fn bound(&self, n: f64) -> f64 {
        -self.big_c * n.powf(self.gamma) * n.ln()
    }
}
