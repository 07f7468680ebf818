//! `e^{-th}(x,y) = ψ^t(x-y) e^{-κt} E[e^{-∫₀ᵗ U(ω(s)) ds}]` over bridges
//! from `y` to `x`.

use green_kernels::special::psi_t;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BridgeError, Result};
use crate::path::{default_steps, fill_bridge, path_rng, MIN_STEPS};

/// Paths per work unit. Fixed so the reduction order, and hence every
/// bit of the result, is independent of the worker count.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FkTarget {
    HeatKernel,
    RhoNu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Plane,
    /// Paths are killed on leaving `[-L, L]^2` (Dirichlet walls).
    Square { half_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FkConfig {
    pub n_paths: usize,
    /// `None` selects `max(64, ⌈t/0.01⌉)`.
    pub steps: Option<usize>,
    pub seed: u64,
    /// 0 uses the global pool.
    pub workers: usize,
    pub domain: Domain,
}

impl FkConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            steps: None,
            seed,
            workers: 0,
            domain: Domain::Plane,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FKEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub steps: usize,
    pub target: FkTarget,
    /// Upper bound on the discarded series tail (density estimates only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

impl FKEstimate {
    /// `|value - reference| ≤ max(rel · |reference|, sigmas · stderr)`
    pub fn agrees_with(&self, reference: f64, rel: f64, sigmas: f64) -> bool {
        (self.value - reference).abs() <= (rel * reference.abs()).max(sigmas * self.stderr)
    }
}

pub(crate) fn run_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BridgeError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Probability that a bridge segment between `p` and `q` (both inside)
/// stays inside `[-L, L]` in one coordinate, to leading order.
fn segment_survival(p: f64, q: f64, l: f64, ds: f64) -> f64 {
    let hi = 1.0 - (-2.0 * (l - p) * (l - q) / ds).exp();
    let lo = 1.0 - (-2.0 * (l + p) * (l + q) / ds).exp();
    (hi * lo).max(0.0)
}

/// Pathwise weights `e^{-∫U}` for several potentials on shared paths.
/// Returns per-potential `(Σw, Σw²)` over all paths.
fn weight_sums(
    x: [f64; 2],
    y: [f64; 2],
    t: f64,
    potentials: &[&(dyn Fn([f64; 2]) -> f64 + Sync)],
    steps: usize,
    cfg: &FkConfig,
    stream_base: u64,
) -> Result<Vec<(f64, f64)>> {
    let chunks = cfg.n_paths.div_ceil(CHUNK);
    let np = potentials.len();
    let ds = t / steps as f64;
    let partial: Vec<Vec<(f64, f64)>> = run_pool(cfg.workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut out = vec![[0.0; 2]; steps + 1];
                let mut scratch = vec![[0.0; 2]; steps + 1];
                let mut acc = vec![(0.0, 0.0); np];
                let mut integral = vec![0.0; np];
                for p in c * CHUNK..((c + 1) * CHUNK).min(cfg.n_paths) {
                    let mut rng = path_rng(cfg.seed, stream_base + p as u64);
                    fill_bridge(&mut rng, x, y, t, &mut out, &mut scratch);
                    let mut survive = 1.0;
                    if let Domain::Square { half_width: l } = cfg.domain {
                        for w in out.windows(2) {
                            if w[1][0].abs() >= l || w[1][1].abs() >= l {
                                survive = 0.0;
                                break;
                            }
                            survive *= segment_survival(w[0][0], w[1][0], l, ds) * segment_survival(w[0][1], w[1][1], l, ds);
                        }
                    }
                    if survive == 0.0 {
                        continue;
                    }
                    for (k, u) in potentials.iter().enumerate() {
                        let mut s = 0.5 * (u(out[0]) + u(out[steps]));
                        for pt in &out[1..steps] {
                            s += u(*pt);
                        }
                        integral[k] = s * ds;
                    }
                    for k in 0..np {
                        let w = survive * (-integral[k]).exp();
                        acc[k].0 += w;
                        acc[k].1 += w * w;
                    }
                }
                acc
            })
            .collect()
    })?;
    let mut total = vec![(0.0, 0.0); np];
    for chunk in &partial {
        for k in 0..np {
            total[k].0 += chunk[k].0;
            total[k].1 += chunk[k].1;
        }
    }
    Ok(total)
}

fn check(t: f64, cfg: &FkConfig) -> Result<usize> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(BridgeError::BadParameter {
            name: "t",
            reason: format!("must be positive, got {t}"),
        });
    }
    if cfg.n_paths < 2 {
        return Err(BridgeError::BadParameter {
            name: "n_paths",
            reason: "need at least two paths for an error bar".into(),
        });
    }
    let steps = cfg.steps.unwrap_or_else(|| default_steps(t));
    if steps < MIN_STEPS {
        return Err(BridgeError::TooFewSteps(steps));
    }
    Ok(steps)
}

pub(crate) fn heat_multi_stream(
    x: [f64; 2],
    y: [f64; 2],
    t: f64,
    potentials: &[&(dyn Fn([f64; 2]) -> f64 + Sync)],
    kappa: f64,
    cfg: &FkConfig,
    stream_base: u64,
) -> Result<Vec<FKEstimate>> {
    let steps = check(t, cfg)?;
    let sums = weight_sums(x, y, t, potentials, steps, cfg, stream_base)?;
    let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
    let pre = psi_t(t, r2) * (-kappa * t).exp();
    let n = cfg.n_paths as f64;
    Ok(sums
        .into_iter()
        .map(|(s, s2)| {
            let mean = s / n;
            let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
            FKEstimate {
                value: pre * mean,
                stderr: pre * (var / n).sqrt(),
                n_paths: cfg.n_paths,
                steps,
                target: FkTarget::HeatKernel,
                tail_bound: None,
            }
        })
        .collect())
}

/// Heat kernels for several potentials from one set of paths (pathwise
/// comparisons).
pub fn fk_heat_kernel_shared(
    x: [f64; 2],
    y: [f64; 2],
    t: f64,
    potentials: &[&(dyn Fn([f64; 2]) -> f64 + Sync)],
    kappa: f64,
    cfg: &FkConfig,
) -> Result<Vec<FKEstimate>> {
    heat_multi_stream(x, y, t, potentials, kappa, cfg, 0)
}

pub fn fk_heat_kernel(
    x: [f64; 2],
    y: [f64; 2],
    t: f64,
    potential: &(dyn Fn([f64; 2]) -> f64 + Sync),
    kappa: f64,
    cfg: &FkConfig,
) -> Result<FKEstimate> {
    Ok(heat_multi_stream(x, y, t, &[potential], kappa, cfg, 0)?[0])
}
