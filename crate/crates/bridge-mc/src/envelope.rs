use green_kernels::{fit_heat_samples, BoundFit, FitOptions, FitSample, HeatSample};
use schrodinger_core::PotentialSpec;

use crate::error::Result;

/// Fit the four-term heat-kernel envelope to kernel values at the given
/// `(x, y, t)` triples, taken from `kernel` (a spectral oracle or FK).
pub fn envelope_check_heat(
    spec: &PotentialSpec,
    points: &[([f64; 2], [f64; 2], f64)],
    mut kernel: impl FnMut([f64; 2], [f64; 2], f64) -> Result<f64>,
) -> Result<(BoundFit, Vec<FitSample>)> {
    let mut samples = Vec::with_capacity(points.len());
    for &(x, y, t) in points {
        samples.push(HeatSample {
            x,
            y,
            t,
            value: kernel(x, y, t)?,
        });
    }
    let opts = FitOptions {
        min_separation: 0.0,
        ..FitOptions::default()
    };
    Ok(fit_heat_samples(&samples, spec, &opts)?)
}
