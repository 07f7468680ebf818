use counterterm_solver::{contraction_probe, solve_counterterm, CountertermProblem, CountertermState, Regime};

use super::{loglog_slope, Context, ExperimentOutput, LabSystem};
use crate::config::Experiment;
use crate::error::Result;
use crate::manifest::{ManifestEntry, Metrics};
use crate::plot::PlotData;

pub const MAX_ITERATIONS: usize = 50;
pub const RESIDUAL_GATE: f64 = 1e-10;
pub const SLOPE_TARGET: f64 = -0.5;
pub const SLOPE_TOL: f64 = 0.15;
pub const PROBE_SEED: u64 = 30;

pub fn problem(ctx: &Context, sys: &LabSystem, kappa: f64) -> Result<CountertermProblem> {
    let c = &ctx.cfg.counterterm;
    let regime = Regime::Quantum {
        epsilon: c.epsilon_multiple * sys.grid.spacing(),
        nu: c.nu,
    };
    Ok(CountertermProblem::new(&sys.grid, sys.bare.clone(), kappa, regime)?)
}

fn rows(s: &CountertermState) -> Vec<Vec<f64>> {
    s.log
        .iter()
        .map(|r| vec![r.m as f64, r.residual, r.contraction_ratio.unwrap_or(f64::NAN)])
        .collect()
}

pub fn run(ctx: &Context) -> Result<ExperimentOutput> {
    let e = Experiment::Counterterm;
    let c = &ctx.cfg.counterterm;
    let sys = ctx.lab()?;
    let p = problem(ctx, sys, c.kappa)?;
    let state = solve_counterterm(&p, None, c.tol, c.max_iter)?;
    let start: Vec<f64> = sys.bare.iter().map(|u| c.start_scale * u).collect();
    let second = solve_counterterm(&p, Some(&start), c.tol, c.max_iter)?;
    let uniqueness = p.distance(&state.iterate, &second.iterate);

    let kappas = &ctx.cfg.sweep.kappa;
    let k_hi = kappas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let q_lo = contraction_probe(&p, c.probe_pairs, c.probe_radius, ctx.seed(PROBE_SEED))?;
    let q_hi = contraction_probe(&problem(ctx, sys, k_hi)?, c.probe_pairs, c.probe_radius, ctx.seed(PROBE_SEED))?;
    let mut first = Vec::with_capacity(kappas.len());
    for &k in kappas {
        first.push(problem(ctx, sys, k)?.first_step(&sys.bare)?);
    }
    let slope = loglog_slope(kappas, &first);

    let converged = state.converged && state.iterations() <= MAX_ITERATIONS && state.final_residual() <= RESIDUAL_GATE;
    let contracting = q_hi.q < q_lo.q && q_lo.q < 1.0;
    let slope_ok = (slope - SLOPE_TARGET).abs() <= SLOPE_TOL;
    let unique = uniqueness <= 10.0 * c.tol;
    let mut m = Metrics::new();
    m.set("kappa", c.kappa)
        .set("epsilon", c.epsilon_multiple * sys.grid.spacing())
        .set("nu", c.nu)
        .set("iterations", state.iterations())
        .set("final_residual", state.final_residual())
        .set("converged", converged)
        .set("residual_history", &state.residual_history)
        .set("ball_radius", state.ball_radius())
        .set("second_start_iterations", second.iterations())
        .set("uniqueness_gap", uniqueness)
        .set("q_low_kappa", q_lo.q)
        .set("q_high_kappa", q_hi.q)
        .set("q_kappas", [c.kappa, k_hi])
        .set("first_step_kappas", kappas)
        .set("first_step", &first)
        .set("first_step_slope", slope)
        .set("first_step_slope_ok", slope_ok)
        .set("contracting", contracting)
        .set("unique", unique);
    let pass = converged && contracting && slope_ok && unique;

    let (log_path, log_name) = ctx.artifact(e, "iterations.json")?;
    state.write_log(&log_path)?;
    let (stem, fp_name) = ctx.artifact(e, "fixed_point")?;
    state.save_fixed_point(&stem)?;
    let mut entry = ManifestEntry::new(Some(9), e.name(), "counterterm_contraction", Some(pass), m);
    entry.artifacts = vec![log_name, format!("{fp_name}.bin"), format!("{fp_name}.json")];

    let mut plot = PlotData::new(e.name(), &["iteration", "residual", "ratio"]);
    plot.push("start_bare", rows(&state));
    plot.push("start_scaled", rows(&second));
    plot.push(
        "first_step_vs_kappa",
        kappas.iter().zip(&first).map(|(k, f)| vec![*k, *f, f64::NAN]).collect(),
    );
    Ok(ExperimentOutput {
        entries: vec![entry],
        plot,
    })
}
