//! Translation-invariant kernels of `κ - Δ_lattice/2` on a periodic grid,
//! evaluated by a 2D FFT of the lattice dispersion.

use std::f64::consts::PI;

use faer::Mat;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use schrodinger_core::{Boundary, LatticeGrid};

use crate::error::{KernelError, Result};
use crate::kernel::{KernelKind, KernelMatrix, KernelParams};

/// `K(z)` for every lattice displacement `z = (dx, dy) a`, `0 <= dx, dy < n`.
#[derive(Debug, Clone)]
pub struct HomogeneousKernel {
    n: usize,
    spacing: f64,
    kappa: f64,
    values: Vec<f64>,
}

/// Eigenvalue of `κ - Δ_lattice/2` for the plane wave with mode numbers `(m1, m2)`.
pub fn lattice_dispersion(n: usize, spacing: f64, kappa: f64, m1: usize, m2: usize) -> f64 {
    let c = |m: usize| (2.0 * PI * m as f64 / n as f64).cos();
    kappa + (2.0 - c(m1) - c(m2)) / (spacing * spacing)
}

/// `K(z) = (1/(n a)^2) sum_p f(λ_p) e^{i p z}`.
pub fn homogeneous_kernel(n: usize, spacing: f64, kappa: f64, f: impl Fn(f64) -> f64) -> HomogeneousKernel {
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(n * n);
    for m2 in 0..n {
        for m1 in 0..n {
            buf.push(Complex::new(f(lattice_dispersion(n, spacing, kappa, m1, m2)), 0.0));
        }
    }
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    // rows
    for row in buf.chunks_exact_mut(n) {
        fft.process(row);
    }
    // columns
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = buf[r * n + c];
        }
        fft.process(&mut col);
        for r in 0..n {
            buf[r * n + c] = col[r];
        }
    }
    let area = (n as f64 * spacing).powi(2);
    HomogeneousKernel {
        n,
        spacing,
        kappa,
        values: buf.iter().map(|z| z.re / area).collect(),
    }
}

impl HomogeneousKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Value at displacement `(dx, dy)` lattice steps, wrapped.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let n = self.n as isize;
        let x = dx.rem_euclid(n) as usize;
        let y = dy.rem_euclid(n) as usize;
        self.values[y * self.n + x]
    }

    /// `K(0)`, the common diagonal.
    pub fn diagonal(&self) -> f64 {
        self.values[0]
    }

    /// `a^2 sum_z w(z) K(z)` for a weight given on displacements.
    pub fn smear(&self, weight: impl Fn(isize, isize) -> f64, radius: isize) -> f64 {
        let mut acc = 0.0;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let w = weight(dx, dy);
                if w != 0.0 {
                    acc += w * self.at(dx, dy);
                }
            }
        }
        acc * self.spacing * self.spacing
    }

    /// Dense kernel on a periodic grid with the same `n` and spacing.
    pub fn to_kernel_matrix(&self, grid: &LatticeGrid, kind: KernelKind) -> Result<KernelMatrix> {
        if grid.boundary() != Boundary::Periodic
            || grid.n() != self.n
            || (grid.spacing() - self.spacing).abs() > 1e-12 * self.spacing
        {
            return Err(KernelError::GridMismatch);
        }
        let dim = grid.sites();
        let entries = Mat::from_fn(dim, dim, |i, j| {
            let (d1, d2) = grid.displacement(i, j);
            self.at(d1, d2)
        });
        let params = KernelParams {
            kappa: Some(self.kappa),
            ..Default::default()
        };
        Ok(KernelMatrix::new(kind, params, Some(grid.clone()), grid.weight(), entries))
    }
}
