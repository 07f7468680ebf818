use std::path::Path;

use faer::{Mat, MatRef};
use schrodinger_core::persist::{read_array, write_array, ArraySidecar};
use schrodinger_core::{CoreError, LatticeGrid};
use serde::{Deserialize, Serialize};

use crate::error::{KernelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cutoff {
    /// `ϑ(x) = e^{-x}`
    Exp,
    /// `ϑ(x) = 1_{x <= 1}`
    Sharp,
}

impl Cutoff {
    pub fn weight(self, x: f64) -> f64 {
        match self {
            Cutoff::Exp => (-x).exp(),
            Cutoff::Sharp => {
                if x <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Green,
    GreenTruncated,
    /// `|G_N - G|`, used by the truncation-envelope fit.
    GreenDifference,
    Heat,
    QuantumGreen,
    QuantumGreenPartial,
    /// `|∇_x K(x,y)|` of a green-type kernel.
    GradientNorm,
}

impl KernelKind {
    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Spectral cutoff `N`; `None` is `N = ∞`.
    pub n_cut: Option<f64>,
    pub cutoff: Option<Cutoff>,
    pub t: Option<f64>,
    pub nu: Option<f64>,
    pub t_partial: Option<f64>,
    pub kappa: Option<f64>,
}

/// Dense grid kernel `K(x,y)` in continuum normalization:
/// `(K f)(x) = a^2 sum_y K(x,y) f(y)`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    kind: KernelKind,
    params: KernelParams,
    grid: Option<LatticeGrid>,
    weight: f64,
    entries: Mat<f64>,
}

impl KernelMatrix {
    pub fn new(kind: KernelKind, params: KernelParams, grid: Option<LatticeGrid>, weight: f64, entries: Mat<f64>) -> Self {
        Self {
            kind,
            params,
            grid,
            weight,
            entries,
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn grid(&self) -> Option<&LatticeGrid> {
        self.grid.as_ref()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> MatRef<'_, f64> {
        self.entries.as_ref()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, j)]).collect()
    }

    /// `(K f)(x) = a^2 sum_y K(x,y) f(y)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for j in 0..n {
            let fj = f[j] * self.weight;
            if fj == 0.0 {
                continue;
            }
            let col = self.entries.col(j);
            for i in 0..n {
                out[i] += col[i] * fj;
            }
        }
        out
    }

    /// `<f, K f> = a^4 sum f(x) K(x,y) f(y)`.
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        let kf = self.apply(f);
        self.weight * f.iter().zip(&kf).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn scaled(&self, s: f64) -> KernelMatrix {
        let mut out = self.clone();
        out.entries = Mat::from_fn(self.dim(), self.dim(), |i, j| s * self.entries[(i, j)]);
        out
    }

    /// Entrywise `|self - other|`, tagged as a truncation difference.
    pub fn abs_difference(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        if self.dim() != other.dim() || self.grid != other.grid {
            return Err(KernelError::GridMismatch);
        }
        let entries = Mat::from_fn(self.dim(), self.dim(), |i, j| (self.entries[(i, j)] - other.entries[(i, j)]).abs());
        let params = if self.params.n_cut.is_some() {
            self.params.clone()
        } else {
            other.params.clone()
        };
        Ok(KernelMatrix::new(KernelKind::GreenDifference, params, self.grid.clone(), self.weight, entries))
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max(self.entries[(i, j)].abs());
            }
        }
        m
    }

    pub fn min_entry(&self) -> f64 {
        let mut m = f64::INFINITY;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.min(self.entries[(i, j)]);
            }
        }
        m
    }

    pub fn symmetry_error(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.dim() {
            for i in 0..j {
                m = m.max((self.entries[(i, j)] - self.entries[(j, i)]).abs());
            }
        }
        m
    }

    /// Persist as `stem.bin` + `stem.json` with kind, params and grid checksum.
    pub fn save(&self, stem: &Path) -> Result<ArraySidecar> {
        let n = self.dim();
        let mut flat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                flat.push(self.entries[(i, j)]);
            }
        }
        let meta = serde_json::json!({
            "kind": self.kind,
            "params": self.params,
            "grid": self.grid,
            "grid_checksum": self.grid.as_ref().map(|g| g.checksum()),
            "weight": self.weight,
        });
        Ok(write_array(stem, &flat, &[n, n], meta)?)
    }

    pub fn load(stem: &Path) -> Result<KernelMatrix> {
        let (flat, side) = read_array(stem)?;
        let bad = |w: &str| KernelError::Core(CoreError::Metadata(format!("kernel sidecar: {w}")));
        if side.shape.len() != 2 || side.shape[0] != side.shape[1] {
            return Err(bad("shape"));
        }
        let n = side.shape[0];
        let kind: KernelKind = serde_json::from_value(side.meta["kind"].clone()).map_err(|_| bad("kind"))?;
        let params: KernelParams = serde_json::from_value(side.meta["params"].clone()).map_err(|_| bad("params"))?;
        let grid: Option<LatticeGrid> = serde_json::from_value(side.meta["grid"].clone()).map_err(|_| bad("grid"))?;
        if let (Some(g), Some(sum)) = (&grid, side.meta["grid_checksum"].as_str()) {
            if g.checksum() != sum {
                return Err(KernelError::Core(CoreError::Checksum("grid".into())));
            }
        }
        let weight = side.meta["weight"].as_f64().ok_or_else(|| bad("weight"))?;
        let entries = Mat::from_fn(n, n, |i, j| flat[i * n + j]);
        Ok(KernelMatrix::new(kind, params, grid, weight, entries))
    }
}
