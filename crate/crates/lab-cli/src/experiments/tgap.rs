use green_kernels::riemann_trace_gap;
use schrodinger_core::{assemble_hamiltonian, eval_potential, spectral_decompose, LatticeGrid};

use super::{loglog_slope, Context, ExperimentOutput};
use crate::config::Experiment;
use crate::error::{LabError, Result};
use crate::manifest::{ManifestEntry, Metrics};
use crate::plot::PlotData;

pub const SLOPE_SLACK: f64 = 0.2;

pub fn run(ctx: &Context) -> Result<ExperimentOutput> {
    let e = Experiment::TGap;
    let cfg = ctx.cfg;
    let tc = &cfg.tgap;
    let spec = cfg.potential.spec();
    let grid = LatticeGrid::new(cfg.grid.half_width, tc.n, cfg.grid.boundary)?;
    let u = eval_potential(&spec, &grid)?;
    let u2: Vec<f64> = u.iter().map(|x| tc.u2_scale * x).collect();
    let (tol, s) = (cfg.spectral.tol_eig, cfg.spectral.s);
    let s1 = spectral_decompose(&assemble_hamiltonian(&grid, &u, spec.kappa)?, grid.sites(), tol, s)?;
    let s2 = spectral_decompose(&assemble_hamiltonian(&grid, &u2, spec.kappa)?, grid.sites(), tol, s)?;
    let a2 = grid.weight();
    let mut rows = Vec::new();
    let (mut fit_nu, mut fit_gap) = (Vec::new(), Vec::new());
    for &nu in &cfg.sweep.nu {
        let g = riemann_trace_gap(&s1, &s2, nu)?;
        rows.push(vec![nu, g.gap_l1, g.t_sup]);
        if nu >= tc.min_nu_over_a2 * a2 {
            fit_nu.push(nu);
            fit_gap.push(g.gap_l1);
        }
    }
    if fit_nu.len() < 2 {
        return Err(LabError::config(
            "sweep.nu",
            format!("need two values with nu >= {} a^2 = {:.3e}", tc.min_nu_over_a2, tc.min_nu_over_a2 * a2),
        ));
    }
    let slope = loglog_slope(&fit_nu, &fit_gap);
    let target = 1.0 - s / 2.0;
    let all_nu: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let all_gap: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let mut m = Metrics::new();
    m.set("n", tc.n)
        .set("a2", a2)
        .set("nu", &all_nu)
        .set("gap_l1", &all_gap)
        .set("fit_nu", &fit_nu)
        .set("slope", slope)
        .set("slope_full_range", loglog_slope(&all_nu, &all_gap))
        .set("target_exponent", target);
    let pass = slope >= target - SLOPE_SLACK;
    let mut plot = PlotData::new(e.name(), &["nu", "gap_l1", "t_sup"]);
    plot.push("trace_gap", rows);
    Ok(ExperimentOutput {
        entries: vec![ManifestEntry::new(Some(11), e.name(), "riemann_sum_scaling", Some(pass), m)],
        plot,
    })
}
