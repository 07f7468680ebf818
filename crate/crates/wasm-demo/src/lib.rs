//! A trapped lattice operator for the browser. One `Trap` is built per
//! parameter change; the page then asks it for eigenvalues, mode densities
//! and rows of the Green function.

use green_kernels::{green, Cutoff, KernelError, KernelMatrix, TAIL_TOL};
use schrodinger_core::{
    assemble_hamiltonian, eval_potential, spectral_decompose, Boundary, CoreError, LatticeGrid, PotentialSpec,
    SpectralData,
};
use wasm_bindgen::prelude::*;

/// Kept small so a full dense spectrum stays interactive.
pub const MAX_N: usize = 40;
pub const HALF_WIDTH: f64 = 1.5;

#[derive(Debug)]
pub enum DemoError {
    Core(CoreError),
    Kernel(KernelError),
    Range(String),
}

impl std::fmt::Display for DemoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DemoError::Core(e) => write!(f, "{e}"),
            DemoError::Kernel(e) => write!(f, "{e}"),
            DemoError::Range(s) => f.write_str(s),
        }
    }
}

impl std::error::Error for DemoError {}

impl From<CoreError> for DemoError {
    fn from(e: CoreError) -> Self {
        DemoError::Core(e)
    }
}

impl From<KernelError> for DemoError {
    fn from(e: KernelError) -> Self {
        DemoError::Kernel(e)
    }
}

#[wasm_bindgen]
pub struct Trap {
    grid: LatticeGrid,
    potential: Vec<f64>,
    sd: SpectralData,
}

impl Trap {
    pub fn build(n: usize, theta: f64, gamma: f64, kappa: f64) -> Result<Trap, DemoError> {
        if !(4..=MAX_N).contains(&n) {
            return Err(DemoError::Range(format!("n must lie in 4..={MAX_N}")));
        }
        let grid = LatticeGrid::new(HALF_WIDTH, n, Boundary::Dirichlet)?;
        let spec = PotentialSpec::power(theta, gamma, kappa);
        spec.validate()?;
        let potential = eval_potential(&spec, &grid)?;
        let h = assemble_hamiltonian(&grid, &potential, kappa)?;
        let sd = spectral_decompose(&h, grid.sites(), 1e-10, 1.5)?;
        Ok(Trap { grid, potential, sd })
    }

    fn kernel(&self, n_cut: f64) -> Result<KernelMatrix, DemoError> {
        let cut = (n_cut > 0.0).then_some(n_cut);
        Ok(green(&self.sd, cut, Cutoff::Exp, TAIL_TOL)?)
    }

    /// `G_N(centre, (ix, centre))` for every `ix`; `n_cut <= 0` is the full kernel.
    pub fn green_row_at(&self, n_cut: f64) -> Result<Vec<f64>, DemoError> {
        let g = self.kernel(n_cut)?;
        let n = self.grid.n();
        let c = self.grid.index(n / 2, n / 2);
        Ok((0..n).map(|ix| g.get(c, self.grid.index(ix, n / 2))).collect())
    }
}

#[wasm_bindgen]
impl Trap {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, theta: f64, gamma: f64, kappa: f64) -> Result<Trap, JsError> {
        Trap::build(n, theta, gamma, kappa).map_err(|e| JsError::new(&e.to_string()))
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// Site values of the trap, row-major with `iy` slowest.
    pub fn potential(&self) -> Vec<f64> {
        self.potential.clone()
    }

    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        self.sd.eigenvalues().iter().take(count).copied().collect()
    }

    /// `|u_k|^2` on the grid, in continuum normalisation.
    pub fn mode_density(&self, k: usize) -> Result<Vec<f64>, JsError> {
        if k >= self.sd.count() {
            return Err(JsError::new(&format!("mode {k} out of range")));
        }
        Ok(self.sd.mode(k).iter().map(|u| u * u).collect())
    }

    pub fn green_row(&self, n_cut: f64) -> Result<Vec<f64>, JsError> {
        self.green_row_at(n_cut).map_err(|e| JsError::new(&e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_is_positive_and_sorted() {
        let t = Trap::build(10, 12.0, 0.9, 4.0).unwrap();
        let ev = t.eigenvalues(100);
        assert_eq!(ev.len(), 100);
        assert!(ev[0] > 0.0);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn mode_density_is_normalised() {
        let t = Trap::build(10, 12.0, 0.9, 4.0).unwrap();
        let a2 = t.spacing() * t.spacing();
        let total: f64 = t.mode_density(0).unwrap().iter().sum::<f64>() * a2;
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn green_row_peaks_at_centre_and_grows_with_cutoff() {
        let t = Trap::build(12, 12.0, 0.9, 4.0).unwrap();
        let full = t.green_row_at(0.0).unwrap();
        let cut = t.green_row_at(20.0).unwrap();
        let peak = full.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(peak, full[6]);
        assert!(cut[6] < full[6]);
    }

    #[test]
    fn rejects_large_grids() {
        assert!(matches!(Trap::build(MAX_N + 1, 12.0, 0.9, 4.0), Err(DemoError::Range(_))));
    }
}
