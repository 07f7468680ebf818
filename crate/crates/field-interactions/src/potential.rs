//! The two-body potential `v^ε` on the lattice.

use schrodinger_core::{Boundary, LatticeGrid};
use serde::{Deserialize, Serialize};

use crate::error::{FieldError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// `v = (b ⋆ b)/‖b ⋆ b‖_1` with the smooth bump `b` of radius 1/2.
    Bump,
    /// `v = δ/a^2` at one site: the local quartic interaction.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionPotentialSpec {
    pub profile: Profile,
    /// Range scale; the support of `v^ε` has radius `ε`.
    pub epsilon: f64,
}

impl InteractionPotentialSpec {
    pub fn bump(epsilon: f64) -> Self {
        Self {
            profile: Profile::Bump,
            epsilon,
        }
    }

    pub fn local() -> Self {
        Self {
            profile: Profile::Local,
            epsilon: 0.0,
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.epsilon
    }

    /// Sample `v^ε` on a lattice of the given spacing.
    pub fn discretize(&self, spacing: f64) -> Result<LatticeInteraction> {
        match self.profile {
            Profile::Local => Ok(LatticeInteraction::local(spacing)),
            Profile::Bump => {
                if !(self.epsilon >= 2.0 * spacing) {
                    return Err(FieldError::Unresolved {
                        epsilon: self.epsilon,
                        two_a: 2.0 * spacing,
                    });
                }
                Ok(LatticeInteraction::bump(self.epsilon, spacing))
            }
        }
    }
}

/// Smooth bump supported in `|x| < 1/2`.
pub fn bump_profile(r: f64) -> f64 {
    let s = 2.0 * r;
    if s >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// `v^ε` as a list of lattice offsets with values, normalized `a^2 sum v = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeInteraction {
    spacing: f64,
    epsilon: f64,
    radius: isize,
    offsets: Vec<(isize, isize, f64)>,
}

impl LatticeInteraction {
    pub fn local(spacing: f64) -> Self {
        Self {
            spacing,
            epsilon: 0.0,
            radius: 0,
            offsets: vec![(0, 0, 1.0 / (spacing * spacing))],
        }
    }

    /// Discrete autocorrelation of the sampled bump: even, nonnegative and
    /// positive type on the lattice by construction.
    pub fn bump(epsilon: f64, spacing: f64) -> Self {
        let rb = (0.5 * epsilon / spacing).floor() as isize;
        let b = |dx: isize, dy: isize| bump_profile((dx as f64).hypot(dy as f64) * spacing / epsilon);
        let radius = 2 * rb;
        let mut offsets = Vec::new();
        let mut total = 0.0;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let mut acc = 0.0;
                for zy in -rb..=rb {
                    for zx in -rb..=rb {
                        acc += b(zx, zy) * b(zx + dx, zy + dy);
                    }
                }
                if acc > 0.0 {
                    offsets.push((dx, dy, acc));
                    total += acc;
                }
            }
        }
        let norm = 1.0 / (total * spacing * spacing);
        for o in &mut offsets {
            o.2 *= norm;
        }
        Self {
            spacing,
            epsilon,
            radius,
            offsets,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn radius(&self) -> isize {
        self.radius
    }

    pub fn offsets(&self) -> &[(isize, isize, f64)] {
        &self.offsets
    }

    pub fn is_local(&self) -> bool {
        self.radius == 0
    }

    pub fn value(&self, dx: isize, dy: isize) -> f64 {
        if dx.abs() > self.radius || dy.abs() > self.radius {
            return 0.0;
        }
        self.offsets
            .iter()
            .find(|o| o.0 == dx && o.1 == dy)
            .map_or(0.0, |o| o.2)
    }

    /// `a^2 sum v`
    pub fn mass(&self) -> f64 {
        self.offsets.iter().map(|o| o.2).sum::<f64>() * self.spacing * self.spacing
    }

    /// `a^2 sum |v|`
    pub fn l1(&self) -> f64 {
        self.offsets.iter().map(|o| o.2.abs()).sum::<f64>() * self.spacing * self.spacing
    }

    /// Lattice Fourier transform `a^2 sum_z v(z) cos(p z)` at `p = 2π m/(n a)`.
    pub fn fourier(&self, n: usize, m1: usize, m2: usize) -> f64 {
        let k = 2.0 * std::f64::consts::PI / n as f64;
        self.offsets
            .iter()
            .map(|&(dx, dy, v)| v * (k * (m1 as f64 * dx as f64 + m2 as f64 * dy as f64)).cos())
            .sum::<f64>()
            * self.spacing
            * self.spacing
    }

    /// In-grid neighbours `(j, v(x_i - x_j))` of site `i`. Dirichlet grids
    /// drop offsets that leave the box (zero extension); periodic grids wrap.
    pub fn neighbours(&self, grid: &LatticeGrid, i: usize) -> Vec<(usize, f64)> {
        let n = grid.n() as isize;
        let (ix, iy) = grid.unindex(i);
        let periodic = grid.boundary() == Boundary::Periodic;
        let mut out = Vec::with_capacity(self.offsets.len());
        for &(dx, dy, v) in &self.offsets {
            let (mut jx, mut jy) = (ix as isize - dx, iy as isize - dy);
            if periodic {
                jx = jx.rem_euclid(n);
                jy = jy.rem_euclid(n);
            } else if jx < 0 || jy < 0 || jx >= n || jy >= n {
                continue;
            }
            out.push((grid.index(jx as usize, jy as usize), v));
        }
        out
    }

    /// Neighbour lists for every site.
    pub fn stencil(&self, grid: &LatticeGrid) -> Vec<Vec<(usize, f64)>> {
        (0..grid.sites()).map(|i| self.neighbours(grid, i)).collect()
    }

    /// `(v ∗ f)(x) = a^2 sum_y v(x - y) f(y)`.
    pub fn convolve(&self, grid: &LatticeGrid, f: &[f64]) -> Vec<f64> {
        let w = grid.weight();
        (0..grid.sites())
            .map(|i| self.neighbours(grid, i).iter().map(|&(j, v)| v * f[j]).sum::<f64>() * w)
            .collect()
    }
}
