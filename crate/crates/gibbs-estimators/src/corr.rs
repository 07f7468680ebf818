use field_interactions::FieldBatch;
use green_kernels::KernelMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GibbsError, Result};
use crate::ratio::{ComplexEstimate, Estimate, RatioAccumulator, DEFAULT_BLOCKS};
use crate::wick::{combination_terms, monomial, wick_monomial, PointTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionTag {
    None,
    #[serde(rename = "V_N")]
    VN,
    #[serde(rename = "V_eps")]
    VEps,
    #[serde(rename = "W_eps")]
    WEps,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub points: PointTuple,
    pub p: usize,
    pub wick: bool,
    /// Raw moment, or the Wick-ordered one by the monomial recursion.
    pub value: ComplexEstimate,
    /// Wick-ordered value by the binomial combination of `γ_k` and `γ⁰`.
    pub combination: Option<ComplexEstimate>,
    pub interaction_kind: InteractionTag,
    pub zeta_hat: Estimate,
}

impl CorrelationEstimate {
    /// Difference of the two Wick routes in units of their combined error.
    pub fn route_gap_sigma(&self) -> Option<f64> {
        let c = self.combination?;
        let d = (self.value.re - c.re).hypot(self.value.im - c.im);
        let s = self.value.stderr.hypot(c.stderr);
        Some(if s > 0.0 { d / s } else if d == 0.0 { 0.0 } else { f64::INFINITY })
    }
}

/// Streaming estimator for a fixed list of point tuples.
#[derive(Debug, Clone)]
pub struct CorrelationAccumulator {
    tuples: Vec<PointTuple>,
    wick: bool,
    acc: RatioAccumulator,
}

impl CorrelationAccumulator {
    pub fn new(total: u64, tuples: Vec<PointTuple>, wick: bool) -> Result<Self> {
        for t in &tuples {
            if t.x.len() != t.xt.len() || t.p() == 0 || t.p() > 4 {
                return Err(GibbsError::BadPoints(format!(
                    "need 1 <= p <= 4 points in each block, got {} and {}",
                    t.x.len(),
                    t.xt.len()
                )));
            }
        }
        let per = if wick { 2 } else { 1 };
        let n_obs = tuples.len() * per;
        Ok(Self {
            acc: RatioAccumulator::new(total, DEFAULT_BLOCKS, n_obs),
            tuples,
            wick,
        })
    }

    /// Add a batch with its interaction values; `g` is the covariance of the
    /// batch (used for Wick ordering only).
    pub fn push_batch(&mut self, batch: &FieldBatch, g: &KernelMatrix, values: &[f64]) -> Result<()> {
        if values.len() != batch.len() {
            return Err(GibbsError::Mismatch(format!(
                "{} interaction values for {} samples",
                values.len(),
                batch.len()
            )));
        }
        if g.dim() != batch.sites() {
            return Err(GibbsError::Mismatch("kernel and batch sizes differ".into()));
        }
        let gf = |a: usize, b: usize| g.get(a, b);
        let mut obs = Vec::new();
        for s in 0..batch.len() {
            let phi = |x: usize| batch.value(x, s);
            obs.clear();
            for t in &self.tuples {
                if self.wick {
                    obs.push(wick_monomial(&phi, &gf, t));
                    let terms = combination_terms(&phi, &gf, t);
                    obs.push(terms.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1)));
                } else {
                    let full = (1u32 << t.p()) - 1;
                    obs.push(monomial(&phi, t, full, full));
                }
            }
            self.acc.push(batch.first_index + s as u64, values[s], &obs)?;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &CorrelationAccumulator) {
        self.acc.merge(&other.acc);
    }

    pub fn zeta(&self) -> Estimate {
        self.acc.zeta()
    }

    pub fn finish(&self, kind: InteractionTag) -> Result<Vec<CorrelationEstimate>> {
        let zeta = self.acc.zeta();
        if zeta.value.abs() <= 4.0 * zeta.stderr {
            return Err(GibbsError::UnusableNormaliser {
                zeta: zeta.value,
                stderr: zeta.stderr,
            });
        }
        let r = self.acc.ratios();
        let per = if self.wick { 2 } else { 1 };
        Ok(self
            .tuples
            .iter()
            .enumerate()
            .map(|(i, t)| CorrelationEstimate {
                points: t.clone(),
                p: t.p(),
                wick: self.wick,
                value: r[i * per],
                combination: self.wick.then(|| r[i * per + 1]),
                interaction_kind: kind,
                zeta_hat: zeta,
            })
            .collect())
    }
}

/// One-shot version of [`CorrelationAccumulator`] over a single batch.
pub fn corr_estimate(
    batch: &FieldBatch,
    g: &KernelMatrix,
    values: &[f64],
    points: &[PointTuple],
    wick: bool,
    kind: InteractionTag,
) -> Result<Vec<CorrelationEstimate>> {
    let mut acc = CorrelationAccumulator::new(batch.first_index + batch.len() as u64, points.to_vec(), wick)?;
    acc.push_batch(batch, g, values)?;
    acc.finish(kind)
}

/// `E[prod φ(x_i) prod φ̄(x~_j) e^{-V}] / ζ` for blocks of unequal size;
/// vanishes by gauge invariance.
pub fn mixed_moment(batch: &FieldBatch, values: &[f64], x: &[usize], xt: &[usize]) -> Result<ComplexEstimate> {
    let t = PointTuple::new(x.to_vec(), xt.to_vec());
    let mut acc = RatioAccumulator::new(batch.first_index + batch.len() as u64, DEFAULT_BLOCKS, 1);
    let xs = (1u32 << x.len()) - 1;
    let xts = (1u32 << xt.len()) - 1;
    for s in 0..batch.len() {
        let phi = |i: usize| batch.value(i, s);
        acc.push(batch.first_index + s as u64, values[s], &[monomial(&phi, &t, xs, xts)])?;
    }
    Ok(acc.ratios()[0])
}
