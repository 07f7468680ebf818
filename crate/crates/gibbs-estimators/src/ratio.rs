//! Jackknife ratio estimators `E[f e^{-V}] / E[e^{-V}]` accumulated in
//! contiguous blocks of the sample index, so that batches can be streamed.

use serde::{Deserialize, Serialize};

use crate::error::{GibbsError, Result};

pub const DEFAULT_BLOCKS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: f64,
    pub im: f64,
    /// `sqrt(var re + var im)`
    pub stderr: f64,
}

impl ComplexEstimate {
    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Block sums of `w = e^{-V}` and of `w f_j` for `observables` complex observables.
#[derive(Debug, Clone)]
pub struct RatioAccumulator {
    total: u64,
    blocks: usize,
    observables: usize,
    den: Vec<f64>,
    num: Vec<Vec<(f64, f64)>>,
    count: Vec<u64>,
}

impl RatioAccumulator {
    pub fn new(total: u64, blocks: usize, observables: usize) -> Self {
        let blocks = blocks.clamp(2, total.max(2) as usize);
        Self {
            total,
            blocks,
            observables,
            den: vec![0.0; blocks],
            num: vec![vec![(0.0, 0.0); observables]; blocks],
            count: vec![0; blocks],
        }
    }

    fn block_of(&self, index: u64) -> usize {
        ((index as u128 * self.blocks as u128) / self.total.max(1) as u128).min(self.blocks as u128 - 1) as usize
    }

    /// Add sample `index` with interaction value `v` and observables `f`.
    pub fn push(&mut self, index: u64, v: f64, f: &[(f64, f64)]) -> Result<()> {
        if !v.is_finite() {
            return Err(GibbsError::NonFinite { index, value: v });
        }
        debug_assert_eq!(f.len(), self.observables);
        let b = self.block_of(index);
        let w = (-v).exp();
        self.den[b] += w;
        for (acc, &(re, im)) in self.num[b].iter_mut().zip(f) {
            acc.0 += w * re;
            acc.1 += w * im;
        }
        self.count[b] += 1;
        Ok(())
    }

    /// Combine with an accumulator over a disjoint set of sample indices.
    pub fn merge(&mut self, other: &RatioAccumulator) {
        for b in 0..self.blocks {
            self.den[b] += other.den[b];
            self.count[b] += other.count[b];
            for j in 0..self.observables {
                self.num[b][j].0 += other.num[b][j].0;
                self.num[b][j].1 += other.num[b][j].1;
            }
        }
    }

    pub fn samples(&self) -> u64 {
        self.count.iter().sum()
    }

    /// `ζ̂ = mean e^{-V}` with the jackknife error of the block means.
    pub fn zeta(&self) -> Estimate {
        let n: f64 = self.samples() as f64;
        let total: f64 = self.den.iter().sum();
        let value = total / n;
        let reps: Vec<f64> = (0..self.blocks)
            .filter(|&b| self.count[b] > 0)
            .map(|b| (total - self.den[b]) / (n - self.count[b] as f64))
            .collect();
        Estimate {
            value,
            stderr: jackknife_spread(&reps),
        }
    }

    /// Ratio estimates for every observable.
    pub fn ratios(&self) -> Vec<ComplexEstimate> {
        let den: f64 = self.den.iter().sum();
        (0..self.observables)
            .map(|j| {
                let (sr, si) = self.num.iter().fold((0.0, 0.0), |a, b| (a.0 + b[j].0, a.1 + b[j].1));
                let mut re_reps = Vec::with_capacity(self.blocks);
                let mut im_reps = Vec::with_capacity(self.blocks);
                for b in 0..self.blocks {
                    if self.count[b] == 0 {
                        continue;
                    }
                    let d = den - self.den[b];
                    re_reps.push((sr - self.num[b][j].0) / d);
                    im_reps.push((si - self.num[b][j].1) / d);
                }
                let er = jackknife_spread(&re_reps);
                let ei = jackknife_spread(&im_reps);
                ComplexEstimate {
                    re: sr / den,
                    im: si / den,
                    stderr: er.hypot(ei),
                }
            })
            .collect()
    }
}

fn jackknife_spread(reps: &[f64]) -> f64 {
    let b = reps.len() as f64;
    if b < 2.0 {
        return f64::NAN;
    }
    let mean = reps.iter().sum::<f64>() / b;
    ((b - 1.0) / b * reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>()).sqrt()
}

/// `ζ̂ = mean e^{-V}` with a 50-block jackknife error.
pub fn partition_estimate(values: &[f64]) -> Result<Estimate> {
    if values.len() < 2 {
        return Err(GibbsError::TooFewSamples {
            got: values.len(),
            need: 2,
        });
    }
    let mut acc = RatioAccumulator::new(values.len() as u64, DEFAULT_BLOCKS, 0);
    for (i, &v) in values.iter().enumerate() {
        acc.push(i as u64, v, &[])?;
    }
    Ok(acc.zeta())
}
