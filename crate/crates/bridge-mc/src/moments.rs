use serde::{Deserialize, Serialize};

use crate::error::{BridgeError, Result};
use crate::path::{fill_bridge, path_rng, MIN_STEPS};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentRow {
    pub t1: f64,
    pub t2: f64,
    /// Empirical `E|ω(t₂) - ω(t₁)|²`.
    pub moment: f64,
    /// `(t₂-t₁) + |x-y|²(t₂-t₁)²/t²`
    pub envelope: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentFit {
    /// Smallest `C` with `moment ≤ C · envelope` on every row.
    pub c: f64,
    pub rows: Vec<MomentRow>,
}

/// Fit the bridge increment bound over all pairs of `checkpoints + 1`
/// equally spaced times.
pub fn bridge_moment_fit(x: [f64; 2], y: [f64; 2], t: f64, steps: usize, checkpoints: usize, n_paths: usize, seed: u64) -> Result<MomentFit> {
    if steps < MIN_STEPS {
        return Err(BridgeError::TooFewSteps(steps));
    }
    if checkpoints == 0 || steps % checkpoints != 0 || n_paths == 0 {
        return Err(BridgeError::BadParameter {
            name: "checkpoints",
            reason: format!("{checkpoints} checkpoints must divide {steps} steps"),
        });
    }
    let stride = steps / checkpoints;
    let idx: Vec<usize> = (0..=checkpoints).map(|j| j * stride).collect();
    let pairs: Vec<(usize, usize)> = (0..idx.len())
        .flat_map(|a| (a + 1..idx.len()).map(move |b| (a, b)))
        .collect();
    let mut sums = vec![0.0; pairs.len()];
    let mut out = vec![[0.0; 2]; steps + 1];
    let mut scratch = vec![[0.0; 2]; steps + 1];
    for p in 0..n_paths {
        let mut rng = path_rng(seed, p as u64);
        fill_bridge(&mut rng, x, y, t, &mut out, &mut scratch);
        for (s, &(a, b)) in sums.iter_mut().zip(&pairs) {
            let (u, v) = (out[idx[a]], out[idx[b]]);
            *s += (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2);
        }
    }
    let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
    let rows: Vec<MomentRow> = pairs
        .iter()
        .zip(&sums)
        .map(|(&(a, b), s)| {
            let (t1, t2) = (t * idx[a] as f64 / steps as f64, t * idx[b] as f64 / steps as f64);
            let dt = t2 - t1;
            MomentRow {
                t1,
                t2,
                moment: s / n_paths as f64,
                envelope: dt + d2 * dt * dt / (t * t),
            }
        })
        .collect();
    let c = rows.iter().map(|r| r.moment / r.envelope).fold(0.0, f64::max);
    Ok(MomentFit { c, rows })
}
