use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{BridgeError, Result};

pub const MIN_STEPS: usize = 8;

/// Brownian bridge in the plane with `ω(0) = y` and `ω(t) = x`, sampled at
/// `steps + 1` equally spaced times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgePath {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub t: f64,
    pub steps: usize,
    pub samples: Vec<[f64; 2]>,
}

impl BridgePath {
    pub fn time(&self, k: usize) -> f64 {
        self.t * k as f64 / self.steps as f64
    }

    /// The same path run backwards: a bridge from `x` to `y`.
    pub fn reversed(&self) -> BridgePath {
        let mut samples = self.samples.clone();
        samples.reverse();
        BridgePath {
            x: self.y,
            y: self.x,
            t: self.t,
            steps: self.steps,
            samples,
        }
    }
}

/// Default step count `max(64, ⌈t/0.01⌉)`.
pub fn default_steps(t: f64) -> usize {
    64usize.max((t / 0.01).ceil() as usize)
}

/// RNG for one path: a fixed seed with the path id as stream, so every
/// path is reproducible on its own.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `X_s = B_s - (s/t) B_t + y + (s/t)(x - y)`, written into `out`
/// (length `steps + 1`). `scratch` holds the free path `B`.
pub fn fill_bridge<R: Rng>(rng: &mut R, x: [f64; 2], y: [f64; 2], t: f64, out: &mut [[f64; 2]], scratch: &mut [[f64; 2]]) {
    let m = out.len() - 1;
    let sd = (t / m as f64).sqrt();
    scratch[0] = [0.0, 0.0];
    for k in 1..=m {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        scratch[k] = [scratch[k - 1][0] + sd * z0, scratch[k - 1][1] + sd * z1];
    }
    let bt = scratch[m];
    for k in 0..=m {
        let f = k as f64 / m as f64;
        out[k] = [
            scratch[k][0] - f * bt[0] + y[0] + f * (x[0] - y[0]),
            scratch[k][1] - f * bt[1] + y[1] + f * (x[1] - y[1]),
        ];
    }
    // pin exactly despite rounding
    out[0] = y;
    out[m] = x;
}

pub fn sample_bridge(x: [f64; 2], y: [f64; 2], t: f64, steps: usize, seed: u64) -> Result<BridgePath> {
    if steps < MIN_STEPS {
        return Err(BridgeError::TooFewSteps(steps));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(BridgeError::BadParameter {
            name: "t",
            reason: format!("must be positive, got {t}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![[0.0; 2]; steps + 1];
    let mut scratch = vec![[0.0; 2]; steps + 1];
    fill_bridge(&mut rng, x, y, t, &mut samples, &mut scratch);
    Ok(BridgePath { x, y, t, steps, samples })
}
