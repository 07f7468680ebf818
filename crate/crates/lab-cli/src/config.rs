//! Run configuration. Every block has defaults, so `{"experiment": "all"}`
//! is a complete config; unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use schrodinger_core::{Boundary, PotentialKind, PotentialSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    GreenBounds,
    L2Scaling,
    Nelson,
    Correlations,
    Counterterm,
    Limiting,
    TGap,
    FkValidate,
    NonsolveDemo,
    All,
}

impl Experiment {
    /// Every runnable experiment, in the order `all` runs them.
    pub const SINGLE: [Experiment; 10] = [
        Experiment::Spectrum,
        Experiment::GreenBounds,
        Experiment::L2Scaling,
        Experiment::Nelson,
        Experiment::Correlations,
        Experiment::Counterterm,
        Experiment::Limiting,
        Experiment::TGap,
        Experiment::FkValidate,
        Experiment::NonsolveDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::GreenBounds => "green-bounds",
            Experiment::L2Scaling => "l2-scaling",
            Experiment::Nelson => "nelson",
            Experiment::Correlations => "correlations",
            Experiment::Counterterm => "counterterm",
            Experiment::Limiting => "limiting",
            Experiment::TGap => "t-gap",
            Experiment::FkValidate => "fk-validate",
            Experiment::NonsolveDemo => "nonsolve-demo",
            Experiment::All => "all",
        }
    }

    /// Acceptance criteria decided by this experiment.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Experiment::Spectrum => &[],
            Experiment::GreenBounds => &[1, 2, 3],
            Experiment::L2Scaling => &[4],
            Experiment::Nelson => &[5, 6],
            Experiment::Correlations => &[7, 8],
            Experiment::Counterterm => &[9],
            Experiment::Limiting => &[10],
            Experiment::TGap => &[11],
            Experiment::FkValidate => &[12],
            Experiment::NonsolveDemo => &[13],
            Experiment::All => &[14],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::SINGLE
            .iter()
            .chain(std::iter::once(&Experiment::All))
            .find(|e| e.name() == s)
            .copied()
            .ok_or_else(|| LabError::config("experiment", format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub half_width: f64,
    pub n: usize,
    pub boundary: Boundary,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: 1.5,
            n: 24,
            boundary: Boundary::Dirichlet,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    pub theta: f64,
    pub rapid_exponent: f64,
    pub gamma: f64,
    pub kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            kind: PotentialKind::Power,
            theta: 12.0,
            rapid_exponent: 1.0,
            gamma: 0.9,
            kappa: 4.0,
            table: None,
        }
    }
}

impl PotentialConfig {
    pub fn spec(&self) -> PotentialSpec {
        PotentialSpec {
            kind: self.kind,
            theta: self.theta,
            rapid_exponent: self.rapid_exponent,
            gamma: self.gamma,
            kappa: self.kappa,
            table: self.table.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub tol_eig: f64,
    /// Trace exponent `s` in `tr h^{-s}`.
    pub s: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { tol_eig: 1e-10, s: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub batch_size: usize,
    pub seed: u64,
    /// 0 means "use the global pool".
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            batch_size: 100_000,
            seed: 20_240_611,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Interaction ranges in units of the lattice spacing.
    pub epsilon_multiples: Vec<f64>,
    pub nu: Vec<f64>,
    pub n_cut: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            epsilon_multiples: vec![4.0, 8.0, 16.0, 32.0],
            nu: vec![1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 3e-2, 5e-2, 7e-2, 1e-1],
            n_cut: vec![8.0, 16.0, 32.0, 64.0, 128.0],
            kappa: vec![4.0, 16.0, 64.0, 256.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenConfig {
    /// Cutoffs for the `|G_N - G|` envelope.
    pub n_cut: Vec<f64>,
    /// Fine Dirichlet grid for the `τ^ε` divergence.
    pub fine_half_width: f64,
    pub fine_n: usize,
    /// Stride of the site subgrid on which `sup τ^ε` is taken.
    pub fine_stride: usize,
}

impl Default for GreenConfig {
    fn default() -> Self {
        Self {
            n_cut: vec![4.0, 16.0, 64.0],
            fine_half_width: 1.25,
            fine_n: 127,
            fine_stride: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct L2Config {
    pub epsilon_multiple: f64,
    /// Each distance is `‖V_{ratio N} - V_N‖`.
    pub ratio: f64,
    /// Sites of the small grid used for the quadrature oracle.
    pub oracle_n: usize,
}

impl Default for L2Config {
    fn default() -> Self {
        Self {
            epsilon_multiple: 4.0,
            ratio: 4.0,
            oracle_n: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NelsonConfig {
    pub n_cut: f64,
    pub epsilon_multiple: f64,
    pub seeds: usize,
    pub tail_points: usize,
}

impl Default for NelsonConfig {
    fn default() -> Self {
        Self {
            n_cut: 64.0,
            epsilon_multiple: 4.0,
            seeds: 3,
            tail_points: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationConfig {
    pub epsilon_multiple: f64,
    /// Cutoff of the truncated batch used for the zero-mean gates.
    pub n_cut: f64,
    /// Modes kept for the integration-by-parts route.
    pub ibp_modes: usize,
    /// Lattice offset of `x~` from `x` (x at the centre).
    pub offset: [usize; 2],
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        Self {
            epsilon_multiple: 4.0,
            n_cut: 64.0,
            ibp_modes: 6,
            offset: [2, 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountertermConfig {
    pub kappa: f64,
    pub nu: f64,
    pub epsilon_multiple: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub probe_pairs: usize,
    pub probe_radius: f64,
    /// Second starting point is `start_scale * 𝒰`.
    pub start_scale: f64,
}

impl Default for CountertermConfig {
    fn default() -> Self {
        Self {
            kappa: 16.0,
            nu: 0.05,
            epsilon_multiple: 4.0,
            tol: 1e-10,
            max_iter: 200,
            probe_pairs: 10,
            probe_radius: 0.5,
            start_scale: 1.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitingConfig {
    pub kappa: f64,
    pub nu: Vec<f64>,
    /// `ε = ν^eps_exponent`
    pub eps_exponent: f64,
}

impl Default for LimitingConfig {
    fn default() -> Self {
        Self {
            kappa: 16.0,
            nu: vec![0.1, 0.05, 0.025, 0.0125, 0.00625],
            eps_exponent: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TGapConfig {
    pub n: usize,
    /// The comparison trap is `u2_scale * U`.
    pub u2_scale: f64,
    /// Only `ν >= min_nu_over_a2 * a^2` enters the slope fit.
    pub min_nu_over_a2: f64,
}

impl Default for TGapConfig {
    fn default() -> Self {
        Self {
            n: 48,
            u2_scale: 2.0,
            min_nu_over_a2: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FkValidateConfig {
    pub oracle_n: usize,
    pub n_paths: usize,
    pub triples: usize,
    /// Points are drawn in `[-box, box]^2`.
    pub point_box: f64,
    pub t_range: [f64; 2],
    pub rho_nu: f64,
    pub rho_sites: Vec<[f64; 2]>,
    pub rho_tail_tol: f64,
    pub rel_tol: f64,
    pub sigmas: f64,
}

impl Default for FkValidateConfig {
    fn default() -> Self {
        Self {
            oracle_n: 40,
            n_paths: 100_000,
            triples: 20,
            point_box: 1.0,
            t_range: [0.1, 2.0],
            rho_nu: 0.2,
            rho_sites: vec![[0.0, 0.0], [0.3, -0.2], [-0.5, 0.4]],
            rho_tail_tol: 1e-5,
            rel_tol: 0.05,
            sigmas: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonsolveConfig {
    pub kappa: f64,
    pub band: f64,
    pub homogeneous_n: usize,
    pub homogeneous_epsilons: Vec<f64>,
    pub step_n: usize,
    pub step_epsilons: Vec<f64>,
    /// Required ratio of the step floor to the homogeneous residual.
    pub floor_factor: f64,
}

impl Default for NonsolveConfig {
    fn default() -> Self {
        Self {
            kappa: 16.0,
            band: 1.0,
            homogeneous_n: 12,
            homogeneous_epsilons: vec![1.5, 1.25, 1.0],
            step_n: 24,
            step_epsilons: vec![1.5, 1.25, 1.0, 0.8, 0.6, 0.48],
            floor_factor: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub green: GreenConfig,
    #[serde(default)]
    pub l2: L2Config,
    #[serde(default)]
    pub nelson: NelsonConfig,
    #[serde(default)]
    pub correlations: CorrelationConfig,
    #[serde(default)]
    pub counterterm: CountertermConfig,
    #[serde(default)]
    pub limiting: LimitingConfig,
    #[serde(default)]
    pub tgap: TGapConfig,
    #[serde(default)]
    pub fk: FkValidateConfig,
    #[serde(default)]
    pub nonsolve: NonsolveConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("lab-out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::new(Experiment::All)
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::config(key, format!("must be positive and finite, got {v}")))
    }
}

fn all_positive(key: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(LabError::config(key, "must not be empty"));
    }
    for (i, x) in v.iter().enumerate() {
        positive(&format!("{key}[{i}]"), *x)?;
    }
    Ok(())
}

fn at_least(key: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(LabError::config(key, format!("must be at least {min}, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            grid: GridConfig::default(),
            potential: PotentialConfig::default(),
            spectral: SpectralConfig::default(),
            mc: McConfig::default(),
            sweep: SweepConfig::default(),
            output_dir: default_output_dir(),
            green: GreenConfig::default(),
            l2: L2Config::default(),
            nelson: NelsonConfig::default(),
            correlations: CorrelationConfig::default(),
            counterterm: CountertermConfig::default(),
            limiting: LimitingConfig::default(),
            tgap: TGapConfig::default(),
            fk: FkValidateConfig::default(),
            nonsolve: NonsolveConfig::default(),
        }
    }

    /// Parse and validate. Errors name the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.to_string();
            // unknown-field errors carry the field name in the message only
            let key = match (path.as_str(), unknown_field(&msg)) {
                (".", Some(f)) => f,
                (p, Some(f)) if !p.ends_with(&f) => format!("{p}.{f}"),
                (".", None) => "<root>".to_string(),
                (p, _) => p.to_string(),
            };
            LabError::config(key, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        positive("grid.half_width", self.grid.half_width)?;
        at_least("grid.n", self.grid.n, 4)?;
        if self.grid.n > schrodinger_core::DENSE_LIMIT {
            return Err(LabError::config(
                "grid.n",
                format!("lab experiments need the full spectrum; n must be at most {}", schrodinger_core::DENSE_LIMIT),
            ));
        }
        self.potential
            .spec()
            .validate()
            .map_err(|e| LabError::config("potential", e.to_string()))?;
        positive("spectral.tol_eig", self.spectral.tol_eig)?;
        if !(self.spectral.s > 1.0 && self.spectral.s.is_finite()) {
            return Err(LabError::config("spectral.s", "must exceed 1"));
        }
        at_least("mc.batch_size", self.mc.batch_size, 2)?;
        at_least("mc.workers", self.mc.workers, 1)?;
        all_positive("sweep.epsilon_multiples", &self.sweep.epsilon_multiples)?;
        all_positive("sweep.nu", &self.sweep.nu)?;
        all_positive("sweep.n_cut", &self.sweep.n_cut)?;
        all_positive("sweep.kappa", &self.sweep.kappa)?;
        if self.sweep.n_cut.len() < 2 || self.sweep.kappa.len() < 2 {
            return Err(LabError::config("sweep", "n_cut and kappa need at least two values for a slope"));
        }
        all_positive("green.n_cut", &self.green.n_cut)?;
        positive("green.fine_half_width", self.green.fine_half_width)?;
        at_least("green.fine_n", self.green.fine_n, 8)?;
        at_least("green.fine_stride", self.green.fine_stride, 1)?;
        positive("l2.epsilon_multiple", self.l2.epsilon_multiple)?;
        if !(self.l2.ratio > 1.0) {
            return Err(LabError::config("l2.ratio", "must exceed 1"));
        }
        at_least("l2.oracle_n", self.l2.oracle_n, 3)?;
        if !(self.nelson.n_cut > 1.0) {
            return Err(LabError::config("nelson.n_cut", "must exceed 1"));
        }
        positive("nelson.epsilon_multiple", self.nelson.epsilon_multiple)?;
        at_least("nelson.seeds", self.nelson.seeds, 2)?;
        at_least("nelson.tail_points", self.nelson.tail_points, 4)?;
        positive("correlations.epsilon_multiple", self.correlations.epsilon_multiple)?;
        positive("correlations.n_cut", self.correlations.n_cut)?;
        if !(1..=6).contains(&self.correlations.ibp_modes) {
            return Err(LabError::config("correlations.ibp_modes", "must lie in 1..=6"));
        }
        let c = &self.counterterm;
        positive("counterterm.kappa", c.kappa)?;
        positive("counterterm.nu", c.nu)?;
        positive("counterterm.epsilon_multiple", c.epsilon_multiple)?;
        positive("counterterm.tol", c.tol)?;
        at_least("counterterm.max_iter", c.max_iter, 1)?;
        at_least("counterterm.probe_pairs", c.probe_pairs, 1)?;
        positive("counterterm.probe_radius", c.probe_radius)?;
        if c.probe_radius >= 1.0 {
            return Err(LabError::config("counterterm.probe_radius", "must be below 1 to keep probes positive"));
        }
        positive("counterterm.start_scale", c.start_scale)?;
        positive("limiting.kappa", self.limiting.kappa)?;
        all_positive("limiting.nu", &self.limiting.nu)?;
        positive("limiting.eps_exponent", self.limiting.eps_exponent)?;
        at_least("tgap.n", self.tgap.n, 4)?;
        positive("tgap.u2_scale", self.tgap.u2_scale)?;
        positive("tgap.min_nu_over_a2", self.tgap.min_nu_over_a2)?;
        let f = &self.fk;
        at_least("fk.oracle_n", f.oracle_n, 4)?;
        at_least("fk.n_paths", f.n_paths, 2)?;
        at_least("fk.triples", f.triples, 1)?;
        positive("fk.point_box", f.point_box)?;
        if f.point_box >= self.grid.half_width {
            return Err(LabError::config("fk.point_box", "points must stay inside the box"));
        }
        if !(f.t_range[0] > 0.0 && f.t_range[1] >= f.t_range[0]) {
            return Err(LabError::config("fk.t_range", "need 0 < t_min <= t_max"));
        }
        positive("fk.rho_nu", f.rho_nu)?;
        positive("fk.rho_tail_tol", f.rho_tail_tol)?;
        positive("fk.rel_tol", f.rel_tol)?;
        positive("fk.sigmas", f.sigmas)?;
        let ns = &self.nonsolve;
        positive("nonsolve.kappa", ns.kappa)?;
        positive("nonsolve.band", ns.band)?;
        at_least("nonsolve.homogeneous_n", ns.homogeneous_n, 4)?;
        at_least("nonsolve.step_n", ns.step_n, 4)?;
        all_positive("nonsolve.homogeneous_epsilons", &ns.homogeneous_epsilons)?;
        all_positive("nonsolve.step_epsilons", &ns.step_epsilons)?;
        positive("nonsolve.floor_factor", ns.floor_factor)?;
        Ok(())
    }

    /// SHA-256 of everything that can change a number. Output location and
    /// worker count are excluded: neither affects any result.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.mc.workers = 0;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

fn unknown_field(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}
