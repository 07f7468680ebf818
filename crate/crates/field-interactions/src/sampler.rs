//! Regularised complex Gaussian free field `φ_N = sum X_k √(ϑ(λ_k/N)/λ_k) u_k`.
//!
//! Every sample owns its RNG stream: ChaCha8 keyed by the batch seed with
//! stream id equal to the global sample index. Output is therefore identical
//! for any worker count and any chunking.

use faer::Mat;
use green_kernels::Cutoff;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use schrodinger_core::SpectralData;
use serde::{Deserialize, Serialize};

use crate::error::{FieldError, Result};

/// Modes whose amplitude falls below this fraction of the largest are dropped.
const AMPLITUDE_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_cut: Option<f64>,
    pub cutoff: Cutoff,
    pub batch_size: usize,
    pub seed: u64,
    pub workers: usize,
    pub chunk: usize,
}

impl SamplerConfig {
    pub fn new(n_cut: Option<f64>, cutoff: Cutoff, batch_size: usize, seed: u64) -> Self {
        Self {
            n_cut,
            cutoff,
            batch_size,
            seed,
            workers: 1,
            chunk: 1024,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_chunk(mut self, chunk: usize) -> Self {
        self.chunk = chunk.max(1);
        self
    }
}

/// A block of consecutive samples: coordinates `X` (modes x samples) and the
/// fields (sites x samples), split into real and imaginary parts.
#[derive(Debug, Clone)]
pub struct FieldBatch {
    pub first_index: u64,
    pub n_cut: Option<f64>,
    pub cutoff: Cutoff,
    pub seed: u64,
    pub coords_re: Mat<f64>,
    pub coords_im: Mat<f64>,
    pub re: Mat<f64>,
    pub im: Mat<f64>,
    /// Indices of the retained modes, in the order of the coordinate rows.
    pub modes: Vec<usize>,
}

impl FieldBatch {
    pub fn len(&self) -> usize {
        self.re.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sites(&self) -> usize {
        self.re.nrows()
    }

    /// `|φ(x)|^2` for sample `s`.
    pub fn density(&self, s: usize) -> Vec<f64> {
        (0..self.sites())
            .map(|x| self.re[(x, s)].powi(2) + self.im[(x, s)].powi(2))
            .collect()
    }

    pub fn value(&self, x: usize, s: usize) -> (f64, f64) {
        (self.re[(x, s)], self.im[(x, s)])
    }

    /// The batch with every field multiplied by `e^{iα}`.
    pub fn rotated(&self, alpha: f64) -> FieldBatch {
        let (c, s) = (alpha.cos(), alpha.sin());
        let mut out = self.clone();
        for j in 0..self.len() {
            for x in 0..self.sites() {
                let (r, i) = (self.re[(x, j)], self.im[(x, j)]);
                out.re[(x, j)] = c * r - s * i;
                out.im[(x, j)] = s * r + c * i;
            }
        }
        out
    }
}

/// Per-mode amplitudes `√(ϑ(λ/N)/λ)` and the retained mode list.
pub fn amplitudes(spectral: &SpectralData, n_cut: Option<f64>, cutoff: Cutoff) -> (Vec<usize>, Vec<f64>) {
    let amp: Vec<f64> = spectral
        .eigenvalues()
        .iter()
        .map(|&l| match n_cut {
            Some(n) => (cutoff.weight(l / n) / l).sqrt(),
            None => (1.0 / l).sqrt(),
        })
        .collect();
    let top = amp.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..amp.len()).filter(|&k| amp[k] > AMPLITUDE_FLOOR * top).collect();
    let a = keep.iter().map(|&k| amp[k]).collect();
    (keep, a)
}

/// Draw the standard complex normal coordinates of one sample.
fn draw_coords(seed: u64, index: u64, k: usize, re: &mut [f64], im: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..k {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        re[j] = a * scale;
        im[j] = b * scale;
    }
}

/// Prepared sampler: scaled mode matrix `B = U diag(σ)` restricted to retained modes.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    cfg: SamplerConfig,
    modes: Vec<usize>,
    basis: Mat<f64>,
}

impl FieldSampler {
    pub fn new(spectral: &SpectralData, cfg: SamplerConfig) -> Result<Self> {
        if cfg.batch_size == 0 {
            return Err(FieldError::BadParameter {
                name: "batch_size",
                reason: "must be at least 1".into(),
            });
        }
        if let Some(n) = cfg.n_cut {
            if !(n > 0.0) {
                return Err(FieldError::BadParameter {
                    name: "N",
                    reason: format!("must be positive, got {n}"),
                });
            }
        }
        let (modes, amp) = amplitudes(spectral, cfg.n_cut, cfg.cutoff);
        Ok(Self::with_modes(spectral, cfg, modes, amp))
    }

    fn with_modes(spectral: &SpectralData, cfg: SamplerConfig, modes: Vec<usize>, amp: Vec<f64>) -> Self {
        let v = spectral.vectors();
        let basis = Mat::from_fn(v.nrows(), modes.len(), |i, c| v[(i, modes[c])] * amp[c]);
        Self { cfg, modes, basis }
    }

    /// Sampler of the independent increment `ψ` with covariance `G_M - G_N`,
    /// so that `φ_N + ψ` has the law of `φ_M`. Requires `M ≥ N`.
    pub fn increment(spectral: &SpectralData, n: f64, m: f64, cutoff: Cutoff, batch_size: usize, seed: u64) -> Result<Self> {
        if !(n > 0.0 && m >= n) {
            return Err(FieldError::BadParameter {
                name: "M",
                reason: format!("increment needs 0 < N <= M, got N = {n}, M = {m}"),
            });
        }
        let amp: Vec<f64> = spectral
            .eigenvalues()
            .iter()
            .map(|&l| ((cutoff.weight(l / m) - cutoff.weight(l / n)).max(0.0) / l).sqrt())
            .collect();
        let top = amp.iter().cloned().fold(0.0, f64::max);
        let modes: Vec<usize> = (0..amp.len()).filter(|&k| amp[k] > AMPLITUDE_FLOOR * top).collect();
        let a = modes.iter().map(|&k| amp[k]).collect();
        let cfg = SamplerConfig::new(Some(m), cutoff, batch_size, seed);
        Ok(Self::with_modes(spectral, cfg, modes, a))
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn retained_modes(&self) -> usize {
        self.modes.len()
    }

    /// Samples `[first, first + len)`.
    pub fn chunk(&self, first: u64, len: usize) -> FieldBatch {
        let k = self.modes.len();
        let mut cre = Mat::<f64>::zeros(k, len);
        let mut cim = Mat::<f64>::zeros(k, len);
        let mut bre = vec![0.0; k];
        let mut bim = vec![0.0; k];
        for s in 0..len {
            draw_coords(self.cfg.seed, first + s as u64, k, &mut bre, &mut bim);
            for j in 0..k {
                cre[(j, s)] = bre[j];
                cim[(j, s)] = bim[j];
            }
        }
        let re = &self.basis * &cre;
        let im = &self.basis * &cim;
        FieldBatch {
            first_index: first,
            n_cut: self.cfg.n_cut,
            cutoff: self.cfg.cutoff,
            seed: self.cfg.seed,
            coords_re: cre,
            coords_im: cim,
            re,
            im,
            modes: self.modes.clone(),
        }
    }

    /// Run `f` on every chunk of the batch and return the results in chunk
    /// order. Chunks are distributed over `workers` threads.
    pub fn map_chunks<R: Send>(&self, f: impl Fn(&FieldBatch) -> R + Sync) -> Vec<R> {
        let total = self.cfg.batch_size as u64;
        let chunk = self.cfg.chunk as u64;
        let starts: Vec<u64> = (0..total.div_ceil(chunk)).map(|c| c * chunk).collect();
        let run = |&first: &u64| {
            let len = (total - first).min(chunk) as usize;
            f(&self.chunk(first, len))
        };
        if self.cfg.workers <= 1 {
            return starts.iter().map(run).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .expect("thread pool");
        pool.install(|| starts.par_iter().map(run).collect())
    }
}

/// Coupled batches `(φ_N, φ_M = φ_N + ψ)` with `ψ` drawn from `seed + 1`
/// as an independent stream family.
pub fn sample_coupled(
    spectral: &SpectralData,
    n: f64,
    m: f64,
    cutoff: Cutoff,
    batch_size: usize,
    seed: u64,
) -> Result<(FieldBatch, FieldBatch)> {
    let phi = sample_free_field(spectral, Some(n), cutoff, batch_size, seed)?;
    let psi = FieldSampler::increment(spectral, n, m, cutoff, batch_size, seed.wrapping_add(1))?.chunk(0, batch_size);
    let mut phi_m = psi;
    phi_m.re += &phi.re;
    phi_m.im += &phi.im;
    Ok((phi, phi_m))
}

/// Draw the whole batch at once (for moderate batch sizes).
pub fn sample_free_field(
    spectral: &SpectralData,
    n_cut: Option<f64>,
    cutoff: Cutoff,
    batch_size: usize,
    seed: u64,
) -> Result<FieldBatch> {
    let cfg = SamplerConfig::new(n_cut, cutoff, batch_size, seed);
    Ok(FieldSampler::new(spectral, cfg)?.chunk(0, batch_size))
}
