//! Wick-ordered two-point function through Gaussian integration by parts:
//! `γ̂_1(x, x~) = E[L̄_{x~} L_x e^{-V}] / ζ` with `L_x φ = 0`,
//! `L_x φ̄(y) = G(x, y)`, so that
//! `L̄_{x~} L_x e^{-V} = e^{-V} ((L_x V)(L̄_{x~} V) - L̄_{x~} L_x V)`.

use field_interactions::{FieldBatch, Interactions, LatticeInteraction};
use green_kernels::KernelMatrix;
use schrodinger_core::LatticeGrid;
use serde::{Deserialize, Serialize};

use crate::corr::InteractionTag;
use crate::error::{GibbsError, Result};
use crate::ratio::{ComplexEstimate, RatioAccumulator, DEFAULT_BLOCKS};
use crate::wick::{wick_monomial, PointTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IbpForm {
    /// `V = ½ a^4 sum v :|φ|^2 |φ|^2:`
    V,
    /// `W = ½ a^4 sum v :|φ|^2: :|φ|^2: - a^2 sum τ :|φ|^2: - E`
    W,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IbpReport {
    pub points: (usize, usize),
    pub modes: usize,
    pub form: IbpForm,
    pub kind: InteractionTag,
    pub derivative_route: ComplexEstimate,
    pub direct_route: ComplexEstimate,
    pub gap_sigma: f64,
}

pub struct IbpEvaluator<'a> {
    g: &'a KernelMatrix,
    w: f64,
    stencil: Vec<Vec<(usize, f64)>>,
    tau: Vec<f64>,
    form: IbpForm,
}

impl<'a> IbpEvaluator<'a> {
    pub fn new(g: &'a KernelMatrix, grid: &LatticeGrid, v: &LatticeInteraction, form: IbpForm) -> Result<Self> {
        let ev = Interactions::new(g, grid, v)?;
        Ok(Self {
            g,
            w: grid.weight(),
            stencil: v.stencil(grid),
            tau: ev.tau().to_vec(),
            form,
        })
    }

    /// `(L_x V)(L̄_{x~} V) - L̄_{x~} L_x V` for sample `s`.
    pub fn integrand(&self, batch: &FieldBatch, s: usize, x: usize, xt: usize) -> (f64, f64) {
        let n = batch.sites();
        let g = self.g;
        let phi: Vec<(f64, f64)> = (0..n).map(|y| batch.value(y, s)).collect();
        let m: Vec<f64> = (0..n).map(|y| phi[y].0.powi(2) + phi[y].1.powi(2) - g.get(y, y)).collect();
        let w2 = self.w * self.w;
        let (mut lx, mut lbar) = ((0.0, 0.0), (0.0, 0.0));
        let mut second = (0.0, 0.0);
        for y in 0..n {
            let gxy = g.get(x, y);
            let gyx = g.get(y, xt);
            if gxy == 0.0 && gyx == 0.0 {
                continue;
            }
            let vm: f64 = self.stencil[y].iter().map(|&(z, vv)| vv * m[z]).sum();
            // A(y) = ∂V/∂φ̄(y)
            let mut a = (w2 * vm * phi[y].0, w2 * vm * phi[y].1);
            match self.form {
                IbpForm::V => {
                    for &(z, vv) in &self.stencil[y] {
                        let c = w2 * vv * g.get(y, z);
                        a.0 -= c * phi[z].0;
                        a.1 -= c * phi[z].1;
                    }
                }
                IbpForm::W => {
                    a.0 -= self.w * self.tau[y] * phi[y].0;
                    a.1 -= self.w * self.tau[y] * phi[y].1;
                }
            }
            lx.0 += gxy * a.0;
            lx.1 += gxy * a.1;
            lbar.0 += gyx * a.0;
            lbar.1 -= gyx * a.1;
            // ∂A(y)/∂φ(y') contracted with G(x,y) G(y',x~)
            let mut diag = w2 * vm;
            if self.form == IbpForm::W {
                diag -= self.w * self.tau[y];
            }
            second.0 += gxy * gyx * diag;
            for &(yp, vv) in &self.stencil[y] {
                let c = w2 * vv * gxy * g.get(yp, xt);
                if c == 0.0 {
                    continue;
                }
                // φ(y) φ̄(y')
                second.0 += c * (phi[y].0 * phi[yp].0 + phi[y].1 * phi[yp].1);
                second.1 += c * (phi[y].1 * phi[yp].0 - phi[y].0 * phi[yp].1);
                if self.form == IbpForm::V {
                    second.0 -= c * g.get(y, yp);
                }
            }
        }
        let prod = (lx.0 * lbar.0 - lx.1 * lbar.1, lx.0 * lbar.1 + lx.1 * lbar.0);
        (prod.0 - second.0, prod.1 - second.1)
    }
}

/// Compare the derivative representation with the direct Wick-ordered
/// estimate on the same samples. `g` must be the covariance of the batch,
/// which is expected to carry at most six modes.
pub fn ibp_corr_check(
    batch: &FieldBatch,
    values: &[f64],
    g: &KernelMatrix,
    grid: &LatticeGrid,
    v: &LatticeInteraction,
    form: IbpForm,
    kind: InteractionTag,
    x: usize,
    xt: usize,
) -> Result<IbpReport> {
    if batch.modes.len() > 6 {
        return Err(GibbsError::Mismatch(format!("IBP check expects ≤ 6 modes, batch has {}", batch.modes.len())));
    }
    if values.len() != batch.len() {
        return Err(GibbsError::Mismatch("value count differs from batch".into()));
    }
    let ev = IbpEvaluator::new(g, grid, v, form)?;
    let pts = PointTuple::new(vec![x], vec![xt]);
    let gf = |a: usize, b: usize| g.get(a, b);
    let mut acc = RatioAccumulator::new(batch.first_index + batch.len() as u64, DEFAULT_BLOCKS, 2);
    for s in 0..batch.len() {
        let phi = |i: usize| batch.value(i, s);
        let d = ev.integrand(batch, s, x, xt);
        let w = wick_monomial(&phi, &gf, &pts);
        acc.push(batch.first_index + s as u64, values[s], &[d, w])?;
    }
    let r = acc.ratios();
    let gap = (r[0].re - r[1].re).hypot(r[0].im - r[1].im);
    let sig = r[0].stderr.hypot(r[1].stderr);
    Ok(IbpReport {
        points: (x, xt),
        modes: batch.modes.len(),
        form,
        kind,
        derivative_route: r[0],
        direct_route: r[1],
        gap_sigma: if sig > 0.0 { gap / sig } else { 0.0 },
    })
}
