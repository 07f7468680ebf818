use counterterm_solver::{gradient_constant, sandwich_constant, solve_counterterm, solve_limiting, CountertermProblem, Regime};

use super::{Context, ExperimentOutput};
use crate::config::Experiment;
use crate::error::Result;
use crate::manifest::{ManifestEntry, Metrics};
use crate::plot::PlotData;

pub fn run(ctx: &Context) -> Result<ExperimentOutput> {
    let e = Experiment::Limiting;
    let lc = &ctx.cfg.limiting;
    let tol = ctx.cfg.counterterm.tol;
    let max_iter = ctx.cfg.counterterm.max_iter;
    let sys = ctx.lab()?;
    let lim = solve_limiting(&sys.grid, sys.bare.clone(), lc.kappa, tol)?;
    let mut dist = Vec::new();
    let mut sandwich = Vec::new();
    let mut eps = Vec::new();
    let mut rows = Vec::new();
    for &nu in &lc.nu {
        let epsilon = nu.powf(lc.eps_exponent);
        let p = CountertermProblem::new(&sys.grid, sys.bare.clone(), lc.kappa, Regime::Quantum { epsilon, nu })?;
        let s = solve_counterterm(&p, None, tol, max_iter)?;
        let d = p.distance(&s.iterate, &lim.iterate);
        let c = sandwich_constant(&s.iterate, &sys.bare);
        rows.push(vec![nu, d, c]);
        dist.push(d);
        sandwich.push(c);
        eps.push(epsilon);
    }
    let monotone = dist.windows(2).all(|w| w[1] < w[0]);
    let c_lim = sandwich_constant(&lim.iterate, &sys.bare);
    let c_max = sandwich.iter().cloned().fold(c_lim, f64::max);
    let spec = &sys.spec;
    let grad = gradient_constant(&lim.iterate, &sys.grid, |x| spec.g_tilde(x));
    let differentiable = spec.is_differentiable_kind();
    let mut m = Metrics::new();
    m.set("kappa", lc.kappa)
        .set("nu", &lc.nu)
        .set("epsilon", &eps)
        .set("distance_to_limit", &dist)
        .set("monotone", monotone)
        .set("sandwich", &sandwich)
        .set("sandwich_limit", c_lim)
        .set("sandwich_max", c_max)
        .set("gradient_constant", grad)
        .set("differentiable_kind", differentiable)
        .set("limit_iterations", lim.iterations());
    let pass = monotone && c_max.is_finite() && grad.is_finite() && differentiable;
    let mut plot = PlotData::new(e.name(), &["nu", "distance", "sandwich"]);
    plot.push("sweep", rows);
    Ok(ExperimentOutput {
        entries: vec![ManifestEntry::new(Some(10), e.name(), "limiting_counterterm", Some(pass), m)],
        plot,
    })
}
