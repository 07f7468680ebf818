use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::LatticeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    /// `1 + |x|^θ`
    Power,
    /// `1 + floor(|x|)^θ`
    Step,
    /// `exp((1 + |x|^2)^C)`
    Rapid,
    /// Values supplied per grid site.
    Tabulated,
}

/// Trap potential together with the growth data used by the bound checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub theta: f64,
    pub rapid_exponent: f64,
    pub gamma: f64,
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
}

impl PotentialSpec {
    pub fn power(theta: f64, gamma: f64, kappa: f64) -> Self {
        Self {
            kind: PotentialKind::Power,
            theta,
            rapid_exponent: 1.0,
            gamma,
            kappa,
            table: None,
        }
    }

    pub fn step(theta: f64, gamma: f64, kappa: f64) -> Self {
        Self {
            kind: PotentialKind::Step,
            ..Self::power(theta, gamma, kappa)
        }
    }

    pub fn rapid(c: f64, gamma: f64, kappa: f64) -> Self {
        Self {
            kind: PotentialKind::Rapid,
            rapid_exponent: c,
            ..Self::power(2.0, gamma, kappa)
        }
    }

    pub fn tabulated(values: Vec<f64>, gamma: f64, kappa: f64) -> Self {
        Self {
            kind: PotentialKind::Tabulated,
            table: Some(values),
            ..Self::power(2.0, gamma, kappa)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(CoreError::BadPotential {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return bad("theta", "must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma", "must lie in (0, 1)");
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa", "must be positive");
        }
        if self.kind == PotentialKind::Rapid && !(self.rapid_exponent > 0.0) {
            return bad("C", "must be positive");
        }
        if self.kind == PotentialKind::Tabulated {
            match &self.table {
                None => return bad("table", "tabulated kind needs values"),
                Some(t) if t.iter().any(|v| !(*v > 0.0) || !v.is_finite()) => {
                    return bad("table", "values must be positive and finite")
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Closed-form value at a point. `None` for tabulated potentials.
    pub fn value_at(&self, x: [f64; 2]) -> Option<f64> {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        match self.kind {
            PotentialKind::Power => Some(1.0 + r.powf(self.theta)),
            PotentialKind::Step => Some(1.0 + r.floor().powf(self.theta)),
            PotentialKind::Rapid => Some((1.0 + r * r).powf(self.rapid_exponent).exp()),
            PotentialKind::Tabulated => None,
        }
    }

    /// Radial lower bound `g <= U`. For the closed forms the potential is
    /// itself radial and non-decreasing, so `g = U`.
    pub fn g(&self, x: [f64; 2]) -> f64 {
        self.value_at(x).unwrap_or(1.0)
    }

    /// `g~(x) = g(γ x)`.
    pub fn g_tilde(&self, x: [f64; 2]) -> f64 {
        self.g([self.gamma * x[0], self.gamma * x[1]])
    }

    /// Whether the kind is expected to satisfy the differentiability
    /// assumption (D).
    pub fn is_differentiable_kind(&self) -> bool {
        matches!(self.kind, PotentialKind::Power | PotentialKind::Rapid)
    }
}

/// Evaluate the potential on every grid site.
pub fn eval_potential(spec: &PotentialSpec, grid: &LatticeGrid) -> Result<Vec<f64>> {
    spec.validate()?;
    if let Some(table) = &spec.table {
        if spec.kind == PotentialKind::Tabulated {
            if table.len() != grid.sites() {
                return Err(CoreError::TableShape {
                    expected: grid.sites(),
                    got: table.len(),
                });
            }
            return Ok(table.clone());
        }
    }
    Ok((0..grid.sites())
        .map(|i| spec.value_at(grid.position(i)).expect("closed form"))
        .collect())
}

/// Outcome of the growth-assumption check on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    /// `min U / (1 + |x|^θ)`: lower constant of (P).
    pub c_lower: f64,
    pub lower_holds: bool,
    /// `max U / (1 + |x|^θ)`.
    pub ratio_max: f64,
    /// `max U / g~^{3/2}`: upper constant of the sandwich.
    pub c_upper: f64,
    pub upper_holds: bool,
    /// Finite-difference constants `sup |∇U| / g~^{3/2}` at decreasing steps.
    pub gradient_constants: Vec<(f64, f64)>,
    /// Gradient constant stays bounded as the step shrinks.
    pub gradient_holds: bool,
}

/// Check `c(1+|x|^θ) <= U`, `U <= C g~^{3/2}` and, by finite differences at
/// steps `a, a/4, a/16`, whether `|∇U| <= C g~^{3/2}` stays bounded.
pub fn verify_growth_assumption(spec: &PotentialSpec, grid: &LatticeGrid) -> Result<GrowthReport> {
    spec.validate()?;
    let u = eval_potential(spec, grid)?;
    let pos = grid.positions();
    let mut c_lower = f64::INFINITY;
    let mut c_upper: f64 = 0.0;
    let mut ratio_max: f64 = 0.0;
    for (x, &ux) in pos.iter().zip(&u) {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        c_lower = c_lower.min(ux / (1.0 + r.powf(spec.theta)));
        ratio_max = ratio_max.max(ux / (1.0 + r.powf(spec.theta)));
        c_upper = c_upper.max(ux / spec.g_tilde(*x).powf(1.5));
    }
    let mut gradient_constants = Vec::new();
    let mut gradient_holds = false;
    if spec.kind != PotentialKind::Tabulated {
        let a = grid.spacing();
        for h in [a, a / 4.0, a / 16.0] {
            let mut sup: f64 = 0.0;
            // dense radial probe: every grid site plus sub-lattice offsets
            for x in &pos {
                for off in [0.0, 0.25, 0.5, 0.75] {
                    let p = [x[0] + off * a, x[1] + 0.5 * off * a];
                    let f = |q: [f64; 2]| spec.value_at(q).unwrap();
                    let gx = (f([p[0] + h, p[1]]) - f([p[0] - h, p[1]])) / (2.0 * h);
                    let gy = (f([p[0], p[1] + h]) - f([p[0], p[1] - h])) / (2.0 * h);
                    let gt = spec.g_tilde(p).powf(1.5);
                    sup = sup.max((gx * gx + gy * gy).sqrt() / gt);
                }
            }
            gradient_constants.push((h, sup));
        }
        let first = gradient_constants[0].1;
        let last = gradient_constants[gradient_constants.len() - 1].1;
        gradient_holds = last.is_finite() && last <= 2.0 * first.max(1e-300);
    }
    Ok(GrowthReport {
        c_lower,
        lower_holds: c_lower > 0.0,
        ratio_max,
        c_upper,
        upper_holds: c_upper.is_finite(),
        gradient_constants,
        gradient_holds,
    })
}
