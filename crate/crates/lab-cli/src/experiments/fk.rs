use bridge_mc::{fk_heat_kernel, fk_rho_nu, terms_for_tail, write_fk_csv, Domain, FkConfig, FkRow, SpectralOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schrodinger_core::{Boundary, LatticeGrid};

use super::{Context, ExperimentOutput, LabSystem};
use crate::config::Experiment;
use crate::error::{LabError, Result};
use crate::manifest::{ManifestEntry, Metrics};
use crate::plot::PlotData;

/// Triples are drawn from `mc.seed + 20`; triple `i` uses path seed
/// `mc.seed + 100 + i`, density site `j` uses `mc.seed + 200 + j`.
pub const TRIPLE_SEED: u64 = 20;
pub const HEAT_SEED: u64 = 100;
pub const RHO_SEED: u64 = 200;

pub fn run(ctx: &Context) -> Result<ExperimentOutput> {
    let e = Experiment::FkValidate;
    let fc = &ctx.cfg.fk;
    let l = ctx.cfg.grid.half_width;
    let grid = LatticeGrid::new(l, fc.oracle_n, Boundary::Dirichlet)?;
    let sys = LabSystem::build(ctx.cfg, grid)?;
    if sys.spec.value_at([0.0, 0.0]).is_none() {
        return Err(LabError::config("potential.kind", "path integrals need a closed-form potential"));
    }
    let kappa = sys.spec.kappa;
    let spec = sys.spec.clone();
    let oracle = SpectralOracle::new(sys.sd)?;
    let u = move |x: [f64; 2]| spec.value_at(x).unwrap_or(f64::INFINITY);
    let cfg_for = |seed: u64| FkConfig {
        workers: ctx.workers(),
        domain: Domain::Square { half_width: l },
        ..FkConfig::new(fc.n_paths, seed)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(TRIPLE_SEED));
    let b = fc.point_box;
    let mut point = || [rng.random_range(-b..b), rng.random_range(-b..b)];
    let mut triples = Vec::with_capacity(fc.triples);
    for _ in 0..fc.triples {
        let x = point();
        let y = point();
        triples.push((x, y));
    }
    let mut trng = ChaCha8Rng::seed_from_u64(ctx.seed(TRIPLE_SEED + 1));
    let times: Vec<f64> = (0..fc.triples)
        .map(|_| trng.random_range(fc.t_range[0]..=fc.t_range[1]))
        .collect();

    let mut csv_rows = Vec::new();
    let mut heat_rows = Vec::new();
    let mut heat_pass = 0usize;
    let mut worst_rel: f64 = 0.0;
    for (i, (&(x, y), &t)) in triples.iter().zip(&times).enumerate() {
        let seed = ctx.seed(HEAT_SEED + i as u64);
        let est = fk_heat_kernel(x, y, t, &u, kappa, &cfg_for(seed))?;
        let want = oracle.heat(x, y, t);
        if est.agrees_with(want, fc.rel_tol, fc.sigmas) {
            heat_pass += 1;
        }
        worst_rel = worst_rel.max((est.value - want).abs() / want.abs());
        heat_rows.push(vec![want, est.value, est.stderr]);
        csv_rows.push(FkRow {
            x1: x[0],
            x2: x[1],
            y1: y[0],
            y2: y[1],
            t,
            estimate: est.value,
            stderr: est.stderr,
            n_paths: est.n_paths,
            steps: est.steps,
            seed,
        });
    }

    let n_terms = terms_for_tail(fc.rho_nu, kappa, fc.rho_tail_tol);
    let mut rho_rows = Vec::new();
    let mut rho_pass = 0usize;
    let mut rho_rel = Vec::new();
    for (j, &x) in fc.rho_sites.iter().enumerate() {
        let est = fk_rho_nu(x, fc.rho_nu, n_terms, &u, kappa, &cfg_for(ctx.seed(RHO_SEED + j as u64)))?;
        let want = oracle.rho_nu(x, fc.rho_nu);
        if est.agrees_with(want, fc.rel_tol, fc.sigmas) {
            rho_pass += 1;
        }
        rho_rel.push((est.value - want).abs() / want.abs());
        rho_rows.push(vec![want, est.value, est.stderr]);
    }

    let (csv_path, csv_name) = ctx.artifact(e, "heat_kernel.csv")?;
    write_fk_csv(&csv_path, &csv_rows)?;
    let mut m = Metrics::new();
    m.set("oracle_n", fc.oracle_n)
        .set("n_paths", fc.n_paths)
        .set("triples", fc.triples)
        .set("heat_within_gate", heat_pass)
        .set("heat_worst_rel_error", worst_rel)
        .set("rho_nu", fc.rho_nu)
        .set("rho_terms", n_terms)
        .set("rho_within_gate", rho_pass)
        .set("rho_rel_error", &rho_rel)
        .set("rel_tol", fc.rel_tol)
        .set("sigmas", fc.sigmas);
    let pass = heat_pass == fc.triples && rho_pass == fc.rho_sites.len();
    let mut entry = ManifestEntry::new(Some(12), e.name(), "feynman_kac", Some(pass), m);
    entry.artifacts = vec![csv_name];
    let mut plot = PlotData::new(e.name(), &["oracle", "estimate", "stderr"]);
    plot.push("heat", heat_rows);
    plot.push("rho_nu", rho_rows);
    Ok(ExperimentOutput {
        entries: vec![entry],
        plot,
    })
}
