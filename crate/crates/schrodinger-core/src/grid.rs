use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// Uniform square lattice on `[-L, L]^2`.
///
/// Sites are stored row-major: `index = iy * n + ix`. Dirichlet grids keep
/// only interior points (`a = 2L/(n+1)`), periodic grids identify the two
/// edges (`a = 2L/n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeGrid {
    half_width: f64,
    n: usize,
    boundary: Boundary,
    spacing: f64,
}

impl LatticeGrid {
    pub fn new(half_width: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(CoreError::BadHalfWidth(half_width));
        }
        if n < 8 {
            return Err(CoreError::TooFewPoints(n));
        }
        let spacing = match boundary {
            Boundary::Dirichlet => 2.0 * half_width / (n as f64 + 1.0),
            Boundary::Periodic => 2.0 * half_width / n as f64,
        };
        Ok(Self {
            half_width,
            n,
            boundary,
            spacing,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Points per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Quadrature weight `a^2` attached to every site.
    pub fn weight(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn sites(&self) -> usize {
        self.n * self.n
    }

    /// One-dimensional coordinate of lattice line `i`.
    pub fn coord(&self, i: usize) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => -self.half_width + (i as f64 + 1.0) * self.spacing,
            Boundary::Periodic => -self.half_width + i as f64 * self.spacing,
        }
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    pub fn unindex(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    pub fn position(&self, idx: usize) -> [f64; 2] {
        let (ix, iy) = self.unindex(idx);
        [self.coord(ix), self.coord(iy)]
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        (0..self.sites()).map(|i| self.position(i)).collect()
    }

    /// Lattice inner product `a^2 sum f g`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weight() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Neighbours of a site along the 5-point stencil. Dirichlet grids drop
    /// the missing neighbours at the edge; periodic grids wrap.
    pub fn neighbours(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (ix, iy) = self.unindex(idx);
        let n = self.n;
        let periodic = self.boundary == Boundary::Periodic;
        let step = move |i: usize, d: isize| -> Option<usize> {
            let j = i as isize + d;
            if j >= 0 && (j as usize) < n {
                Some(j as usize)
            } else if periodic {
                Some(j.rem_euclid(n as isize) as usize)
            } else {
                None
            }
        };
        [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)]
            .into_iter()
            .filter_map(move |(dx, dy)| {
                let jx = step(ix, dx)?;
                let jy = step(iy, dy)?;
                Some(jy * n + jx)
            })
    }

    /// Signed lattice displacement from `j` to `i` in units of the spacing,
    /// using the minimum image on periodic grids.
    pub fn displacement(&self, i: usize, j: usize) -> (isize, isize) {
        let (ix, iy) = self.unindex(i);
        let (jx, jy) = self.unindex(j);
        let mut dx = ix as isize - jx as isize;
        let mut dy = iy as isize - jy as isize;
        if self.boundary == Boundary::Periodic {
            let n = self.n as isize;
            dx = (dx + n / 2).rem_euclid(n) - n / 2;
            dy = (dy + n / 2).rem_euclid(n) - n / 2;
        }
        (dx, dy)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (dx, dy) = self.displacement(i, j);
        self.spacing * ((dx * dx + dy * dy) as f64).sqrt()
    }

    /// Stable fingerprint of the grid definition.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.half_width.to_le_bytes());
        h.update((self.n as u64).to_le_bytes());
        h.update([self.boundary as u8]);
        hex::encode(h.finalize())
    }
}
