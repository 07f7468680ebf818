use counterterm_solver::{nonsolvability_demo, DemoPotential};

use super::{Context, ExperimentOutput};
use crate::config::Experiment;
use crate::error::Result;
use crate::manifest::{ManifestEntry, Metrics};
use crate::plot::PlotData;

pub const HOMOGENEOUS_TOL: f64 = 1e-8;

pub fn run(ctx: &Context) -> Result<ExperimentOutput> {
    let e = Experiment::NonsolveDemo;
    let nc = &ctx.cfg.nonsolve;
    let l = ctx.cfg.grid.half_width;
    let hom = nonsolvability_demo(DemoPotential::Homogeneous, l, nc.homogeneous_n, nc.kappa, &nc.homogeneous_epsilons, nc.band)?;
    let step = nonsolvability_demo(
        DemoPotential::Step {
            theta: ctx.cfg.potential.theta,
        },
        l,
        nc.step_n,
        nc.kappa,
        &nc.step_epsilons,
        nc.band,
    )?;
    let hom_max = hom.residuals.iter().cloned().fold(0.0, f64::max);
    let floor = step.residuals.iter().cloned().fold(f64::INFINITY, f64::min);
    // the floor is compared with the homogeneous residual, but never with
    // less than the roundoff level
    let reference = hom_max.max(f64::EPSILON);
    let mut m = Metrics::new();
    m.set("homogeneous_epsilons", &hom.epsilons)
        .set("homogeneous_residuals", &hom.residuals)
        .set("step_epsilons", &step.epsilons)
        .set("step_residuals", &step.residuals)
        .set("step_floor", floor)
        .set("floor_over_homogeneous", floor / reference);
    let pass = hom_max <= HOMOGENEOUS_TOL && floor > 0.0 && floor > nc.floor_factor * reference;
    let mut plot = PlotData::new(e.name(), &["epsilon", "residual"]);
    let pairs = |r: &counterterm_solver::NonsolvabilityReport| -> Vec<Vec<f64>> {
        r.epsilons.iter().zip(&r.residuals).map(|(a, b)| vec![*a, *b]).collect()
    };
    plot.push("homogeneous", pairs(&hom));
    plot.push("step", pairs(&step));
    Ok(ExperimentOutput {
        entries: vec![ManifestEntry::new(Some(13), e.name(), "nonsolvability", Some(pass), m)],
        plot,
    })
}
