//! The map `Φ(U) = 𝒰 + (τ^ε_U - τ^{ε,0}) + v^ε ∗ (ρ_ν^U - ρ_ν⁰)` and its
//! limiting version `Φ(U) = 𝒰 + 2 (h_U^{-1} - h_0^{-1})(x,x)`.

use field_interactions::{tau_homogeneous, InteractionPotentialSpec, LatticeInteraction};
use green_kernels::diagonal_with;
use schrodinger_core::{assemble_hamiltonian, spectral_decompose, LatticeGrid, SpectralData};
use serde::{Deserialize, Serialize};

use crate::density::{companion_size, green_diag_homogeneous, rho_nu, rho_nu_homogeneous, tau_field};
use crate::error::{CountertermError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Quantum { epsilon: f64, nu: f64 },
    Limiting,
}

/// One application of `Φ` with its ingredients.
#[derive(Debug, Clone)]
pub struct PhiEval {
    pub image: Vec<f64>,
    pub tau: Vec<f64>,
    pub rho: Vec<f64>,
    pub tau0: f64,
    pub rho0: f64,
}

#[derive(Debug, Clone)]
pub struct CountertermProblem {
    grid: LatticeGrid,
    bare: Vec<f64>,
    kappa: f64,
    regime: Regime,
    v: LatticeInteraction,
    tau0: f64,
    rho0: f64,
    s: f64,
}

impl CountertermProblem {
    pub fn new(grid: &LatticeGrid, bare: Vec<f64>, kappa: f64, regime: Regime) -> Result<Self> {
        if bare.len() != grid.sites() || bare.iter().any(|u| !(*u > 0.0) || !u.is_finite()) {
            return Err(CountertermError::BadParameter {
                name: "bare",
                reason: "bare potential must be positive and finite on every site".into(),
            });
        }
        let (v, tau0, rho0) = match regime {
            Regime::Quantum { epsilon, nu } => {
                let v = InteractionPotentialSpec::bump(epsilon).discretize(grid.spacing())?;
                let tau0 = tau_homogeneous(&v, companion_size(grid), kappa);
                (v, tau0, rho_nu_homogeneous(grid, kappa, nu))
            }
            Regime::Limiting => {
                let g0 = green_diag_homogeneous(grid, kappa);
                (LatticeInteraction::local(grid.spacing()), g0, g0)
            }
        };
        Ok(Self {
            grid: grid.clone(),
            bare,
            kappa,
            regime,
            v,
            tau0,
            rho0,
            s: 1.5,
        })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn bare(&self) -> &[f64] {
        &self.bare
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn interaction(&self) -> &LatticeInteraction {
        &self.v
    }

    /// `‖f‖_𝒰 = sup |f / 𝒰|`
    pub fn norm(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.bare).map(|(a, u)| (a / u).abs()).fold(0.0, f64::max)
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&d)
    }

    pub fn decompose(&self, u: &[f64]) -> Result<SpectralData> {
        let h = assemble_hamiltonian(&self.grid, u, self.kappa)?;
        Ok(spectral_decompose(&h, self.grid.sites(), 1e-8, self.s)?)
    }

    /// `v ∗ f` with `f = 0` outside the box, where the trap is effectively
    /// infinite and both `ρ` and `G(x,·)` vanish.
    fn smear(&self, f: &[f64]) -> Vec<f64> {
        self.v.convolve(&self.grid, f)
    }

    pub fn apply(&self, u: &[f64], iteration: usize) -> Result<PhiEval> {
        if let Some((site, &value)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(CountertermError::PositivityLost { iteration, site, value });
        }
        let sd = self.decompose(u)?;
        let (tau, rho) = match self.regime {
            Regime::Quantum { nu, .. } => {
                let tau = tau_field(&sd, &self.grid, &self.v);
                (tau, rho_nu(&sd, nu)?)
            }
            Regime::Limiting => {
                let d = diagonal_with(&sd, |l| 1.0 / l);
                (d.clone(), d)
            }
        };
        let smeared = self.smear(&rho);
        let image = (0..u.len())
            .map(|x| self.bare[x] + (tau[x] - self.tau0) + (smeared[x] - self.rho0))
            .collect();
        Ok(PhiEval {
            image,
            tau,
            rho,
            tau0: self.tau0,
            rho0: self.rho0,
        })
    }

    /// `‖Φ(𝒰) - 𝒰‖` divided pointwise by `g`.
    pub fn first_step(&self, g: &[f64]) -> Result<f64> {
        let e = self.apply(&self.bare, 0)?;
        Ok(e.image
            .iter()
            .zip(&self.bare)
            .zip(g)
            .map(|((p, u), g)| ((p - u) / g).abs())
            .fold(0.0, f64::max))
    }
}
