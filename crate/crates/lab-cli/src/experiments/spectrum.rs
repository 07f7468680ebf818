use schrodinger_core::persist::save_spectral;
use schrodinger_core::verify_growth_assumption;

use super::{Context, ExperimentOutput};
use crate::config::Experiment;
use crate::error::Result;
use crate::manifest::{ManifestEntry, Metrics};
use crate::plot::PlotData;

/// Relative eigen-residual accepted by the smoke check.
pub const RESIDUAL_TOL: f64 = 1e-8;

pub fn run(ctx: &Context) -> Result<ExperimentOutput> {
    let e = Experiment::Spectrum;
    let sys = ctx.lab()?;
    let residual = sys.sd.max_residual(&sys.h);
    let growth = verify_growth_assumption(&sys.spec, &sys.grid)?;
    let eig = sys.sd.eigenvalues();
    let mut m = Metrics::new();
    m.set("sites", sys.grid.sites())
        .set("spacing", sys.grid.spacing())
        .set("modes", sys.sd.count())
        .set("lambda_min", eig[0])
        .set("lambda_max", eig[eig.len() - 1])
        .set("max_residual", residual)
        .set("trace_h_minus_s", sys.sd.trace_h_minus_s())
        .set("growth_c_lower", growth.c_lower)
        .set("growth_c_upper", growth.c_upper)
        .set("growth_holds", growth.lower_holds && growth.upper_holds);
    let (stem, name) = ctx.artifact(e, "spectral")?;
    save_spectral(&stem, &sys.sd)?;
    let mut entry = ManifestEntry::new(None, e.name(), "eigen_residual", Some(residual <= RESIDUAL_TOL), m);
    entry.artifacts = vec![format!("{name}.bin"), format!("{name}.json")];
    let mut plot = PlotData::new(e.name(), &["k", "lambda"]);
    plot.push("eigenvalues", eig.iter().enumerate().map(|(k, l)| vec![k as f64, *l]).collect());
    Ok(ExperimentOutput {
        entries: vec![entry],
        plot,
    })
}
