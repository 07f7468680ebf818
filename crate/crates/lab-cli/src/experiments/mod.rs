//! One module per experiment. Each returns its manifest entries and plot
//! data; artifacts are written under `<out>/<experiment>/`.

use std::cell::OnceCell;
use std::path::{Path, PathBuf};

use schrodinger_core::{
    assemble_hamiltonian, eval_potential, spectral_decompose, LatticeGrid, OperatorMatrix, PotentialSpec, SpectralData,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{LabError, Result};
use crate::manifest::ManifestEntry;
use crate::plot::PlotData;

pub mod correlations;
pub mod counterterm;
pub mod fk;
pub mod green;
pub mod l2;
pub mod limiting;
pub mod nelson;
pub mod nonsolve;
pub mod spectrum;
pub mod tgap;

/// The trap on the lab grid with its complete spectrum.
pub struct LabSystem {
    pub grid: LatticeGrid,
    pub spec: PotentialSpec,
    pub bare: Vec<f64>,
    pub h: OperatorMatrix,
    pub sd: SpectralData,
}

impl LabSystem {
    pub fn build(cfg: &ExperimentConfig, grid: LatticeGrid) -> Result<Self> {
        let spec = cfg.potential.spec();
        let bare = eval_potential(&spec, &grid)?;
        let h = assemble_hamiltonian(&grid, &bare, spec.kappa)?;
        let sd = spectral_decompose(&h, grid.sites(), cfg.spectral.tol_eig, cfg.spectral.s)?;
        Ok(Self { grid, spec, bare, h, sd })
    }

    /// Site closest to the origin.
    pub fn centre(&self) -> (usize, usize) {
        let c = self.grid.n() / 2;
        (c, c)
    }
}

pub struct ExperimentOutput {
    pub entries: Vec<ManifestEntry>,
    pub plot: PlotData,
}

pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub out: PathBuf,
    lab: OnceCell<LabSystem>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a ExperimentConfig, out: &Path) -> Self {
        Self {
            cfg,
            out: out.to_path_buf(),
            lab: OnceCell::new(),
        }
    }

    pub fn lab(&self) -> Result<&LabSystem> {
        if let Some(l) = self.lab.get() {
            return Ok(l);
        }
        let g = &self.cfg.grid;
        let grid = LatticeGrid::new(g.half_width, g.n, g.boundary)?;
        let sys = LabSystem::build(self.cfg, grid)?;
        Ok(self.lab.get_or_init(|| sys))
    }

    pub fn seed(&self, offset: u64) -> u64 {
        self.cfg.mc.seed.wrapping_add(offset)
    }

    pub fn workers(&self) -> usize {
        self.cfg.mc.workers
    }

    /// Absolute path for an artifact plus the name recorded in the manifest.
    pub fn artifact(&self, experiment: Experiment, file: &str) -> Result<(PathBuf, String)> {
        let dir = self.out.join(experiment.name());
        std::fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
        Ok((dir.join(file), format!("{}/{}", experiment.name(), file)))
    }
}

pub fn run_experiment(ctx: &Context, e: Experiment) -> Result<ExperimentOutput> {
    let out = match e {
        Experiment::Spectrum => spectrum::run(ctx),
        Experiment::GreenBounds => green::run(ctx),
        Experiment::L2Scaling => l2::run(ctx),
        Experiment::Nelson => nelson::run(ctx),
        Experiment::Correlations => correlations::run(ctx),
        Experiment::Counterterm => counterterm::run(ctx),
        Experiment::Limiting => limiting::run(ctx),
        Experiment::TGap => tgap::run(ctx),
        Experiment::FkValidate => fk::run(ctx),
        Experiment::NonsolveDemo => nonsolve::run(ctx),
        Experiment::All => unreachable!("`all` is expanded by the runner"),
    };
    out.map_err(|source| LabError::Experiment {
        experiment: e.name().to_string(),
        source: Box::new(source),
    })
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_slope(&lx, &ly)
}

/// Sample mean and its standard error.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}
