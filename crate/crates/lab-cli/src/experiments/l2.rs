use faer::Mat;
use field_interactions::l2::stencil_of;
use field_interactions::oracle::two_mode_truncation;
use field_interactions::{l2_truncation, l2_truncation_from_kernels, LatticeInteraction};
use green_kernels::Cutoff;
use schrodinger_core::LatticeGrid;

use super::{loglog_slope, Context, ExperimentOutput, LabSystem};
use crate::config::Experiment;
use crate::error::Result;
use crate::manifest::{ManifestEntry, Metrics};
use crate::plot::PlotData;

/// Slack added to the exponent `-1/2 + 1/θ`.
pub const SLOPE_SLACK: f64 = 0.15;
pub const ORACLE_TOL: f64 = 1e-8;

/// Cutoff pairs checked against the quadrature oracle.
const ORACLE_PAIRS: [(f64, f64, Cutoff); 4] =
    [(4.0, 16.0, Cutoff::Exp), (8.0, 32.0, Cutoff::Exp), (16.0, 64.0, Cutoff::Exp), (8.0, 1e3, Cutoff::Sharp)];

pub fn run(ctx: &Context) -> Result<ExperimentOutput> {
    let e = Experiment::L2Scaling;
    let cfg = ctx.cfg;
    let sys = ctx.lab()?;
    let a = sys.grid.spacing();
    let v = LatticeInteraction::bump(cfg.l2.epsilon_multiple * a, a);
    let ns = &cfg.sweep.n_cut;
    let mut dist = Vec::with_capacity(ns.len());
    for &n in ns {
        dist.push(l2_truncation(&sys.sd, &sys.grid, &v, n, cfg.l2.ratio * n, Cutoff::Exp)?);
    }
    let slope = loglog_slope(ns, &dist);
    let bound = -0.5 + 1.0 / cfg.potential.theta + SLOPE_SLACK;
    // the last three points, reported only
    let k = ns.len().saturating_sub(3);
    let tail_slope = loglog_slope(&ns[k..], &dist[k..]);

    let (oracle_gap, oracle_rows) = oracle_check(ctx)?;
    let mut m = Metrics::new();
    m.set("epsilon", cfg.l2.epsilon_multiple * a)
        .set("n_cut", ns)
        .set("distance", &dist)
        .set("slope", slope)
        .set("slope_bound", bound)
        .set("tail_slope", tail_slope)
        .set("oracle_max_rel_gap", oracle_gap);
    let pass = slope <= bound && oracle_gap <= ORACLE_TOL;
    let mut plot = PlotData::new(e.name(), &["N", "distance", "reference"]);
    let c = dist[0] / ns[0].powf(bound - SLOPE_SLACK);
    plot.push(
        "truncation",
        ns.iter()
            .zip(&dist)
            .map(|(n, d)| vec![*n, *d, c * n.powf(bound - SLOPE_SLACK)])
            .collect(),
    );
    plot.push("oracle", oracle_rows);
    Ok(ExperimentOutput {
        entries: vec![ManifestEntry::new(Some(4), e.name(), "l2_truncation_scaling", Some(pass), m)],
        plot,
    })
}

/// Closed form against 8-dimensional Gauss–Hermite quadrature on the two
/// lowest modes of a small grid with the same trap.
fn oracle_check(ctx: &Context) -> Result<(f64, Vec<Vec<f64>>)> {
    let g = &ctx.cfg.grid;
    let grid = LatticeGrid::new(g.half_width, ctx.cfg.l2.oracle_n, g.boundary)?;
    let small = LabSystem::build(ctx.cfg, grid)?;
    let a = small.grid.spacing();
    let sv = stencil_of(&LatticeInteraction::bump(2.0 * a, a), &small.grid);
    let eig = [small.sd.eigenvalues()[0], small.sd.eigenvalues()[1]];
    let vecs = small.sd.vectors();
    let d = vecs.nrows();
    let u = Mat::from_fn(d, 2, |i, k| vecs[(i, k)]);
    let kernel = |n: f64, c: Cutoff| {
        Mat::from_fn(d, d, |x, y| (0..2).map(|k| c.weight(eig[k] / n) / eig[k] * u[(x, k)] * u[(y, k)]).sum())
    };
    let w = small.grid.weight();
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for (n, mm, c) in ORACLE_PAIRS {
        let exact = l2_truncation_from_kernels(&kernel(n, c), &kernel(mm, c), w, &sv);
        let quad = two_mode_truncation(eig, &u, w, &sv, n, mm, c);
        worst = worst.max((exact - quad).abs() / quad.max(1e-12));
        rows.push(vec![n, exact, quad]);
    }
    Ok((worst, rows))
}
