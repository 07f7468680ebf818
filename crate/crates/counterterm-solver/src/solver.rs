use std::path::Path;

use schrodinger_core::persist::{write_array, ArraySidecar};
use serde::{Deserialize, Serialize};

use crate::error::{CountertermError, Result};
use crate::phi::{CountertermProblem, Regime};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Consecutive growing residuals tolerated before giving up.
const GROWTH_PATIENCE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub m: usize,
    pub residual: f64,
    pub contraction_ratio: Option<f64>,
    #[serde(rename = "min_U/bare")]
    pub min_ratio: f64,
    #[serde(rename = "max_U/bare")]
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountertermState {
    pub bare: Vec<f64>,
    pub iterate: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub contraction_history: Vec<f64>,
    pub params: Regime,
    pub kappa: f64,
    pub converged: bool,
    pub log: Vec<IterationRecord>,
}

impl CountertermState {
    pub fn iterations(&self) -> usize {
        self.residual_history.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Largest `‖U^(m) - 𝒰‖_𝒰` seen in the log.
    pub fn ball_radius(&self) -> f64 {
        self.log
            .iter()
            .map(|r| (1.0 - r.min_ratio).max(r.max_ratio - 1.0))
            .fold(0.0, f64::max)
    }

    /// Residuals strictly decrease from iteration 2 on.
    pub fn monotone_after(&self, start: usize) -> bool {
        self.residual_history.windows(2).skip(start).all(|w| w[1] < w[0])
    }

    pub fn write_log(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(&self.log)?)?;
        Ok(())
    }

    pub fn save_fixed_point(&self, stem: &Path) -> Result<ArraySidecar> {
        let meta = serde_json::json!({
            "params": self.params,
            "kappa": self.kappa,
            "converged": self.converged,
            "iterations": self.iterations(),
            "residual": self.final_residual(),
        });
        Ok(write_array(stem, &self.iterate, &[self.iterate.len()], meta)?)
    }
}

/// Picard iteration `U ← Φ(U)` from `start` (default `𝒰`).
pub fn solve_counterterm(problem: &CountertermProblem, start: Option<&[f64]>, tol: f64, max_iter: usize) -> Result<CountertermState> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(CountertermError::BadParameter {
            name: "tol/max_iter",
            reason: format!("need tol > 0 and max_iter > 0, got {tol}, {max_iter}"),
        });
    }
    let bare = problem.bare();
    let mut u = start.unwrap_or(bare).to_vec();
    if u.len() != bare.len() {
        return Err(CountertermError::BadParameter {
            name: "start",
            reason: "length differs from the bare potential".into(),
        });
    }
    let mut state = CountertermState {
        bare: bare.to_vec(),
        iterate: u.clone(),
        residual_history: Vec::new(),
        contraction_history: Vec::new(),
        params: problem.regime(),
        kappa: problem.kappa(),
        converged: false,
        log: Vec::new(),
    };
    let mut growing = 0;
    for m in 0..max_iter {
        let eval = problem.apply(&u, m)?;
        let residual = problem.distance(&eval.image, &u);
        let ratio = state.residual_history.last().map(|prev| residual / prev);
        let (lo, hi) = u
            .iter()
            .zip(bare)
            .map(|(a, b)| a / b)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        state.log.push(IterationRecord {
            m,
            residual,
            contraction_ratio: ratio,
            min_ratio: lo,
            max_ratio: hi,
        });
        state.residual_history.push(residual);
        if let Some(r) = ratio {
            state.contraction_history.push(r);
            growing = if r > 1.0 { growing + 1 } else { 0 };
        }
        state.iterate = u.clone();
        if !residual.is_finite() {
            return Err(CountertermError::NotContracting {
                iteration: m,
                ratio: f64::INFINITY,
            });
        }
        if residual <= tol {
            state.converged = true;
            return Ok(state);
        }
        if growing >= GROWTH_PATIENCE {
            return Err(CountertermError::NotContracting {
                iteration: m,
                ratio: ratio.unwrap_or(f64::NAN),
            });
        }
        u = eval.image;
    }
    Err(CountertermError::MaxIter {
        max_iter,
        residual: state.final_residual(),
    })
}

/// Fixed point of `U ↦ 𝒰 + 2 diag(h_U^{-1} - h_0^{-1})`.
pub fn solve_limiting(grid: &schrodinger_core::LatticeGrid, bare: Vec<f64>, kappa: f64, tol: f64) -> Result<CountertermState> {
    let problem = CountertermProblem::new(grid, bare, kappa, Regime::Limiting)?;
    solve_counterterm(&problem, None, tol, DEFAULT_MAX_ITER)
}
