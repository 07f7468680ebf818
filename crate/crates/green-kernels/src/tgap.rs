use schrodinger_core::SpectralData;
use serde::{Deserialize, Serialize};

use crate::error::{KernelError, Result};
use crate::spectral_kernels::{diagonal_with, quantum_weight};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceGap {
    pub nu: f64,
    /// `a^2 sum |T - T_ν|`
    pub gap_l1: f64,
    /// `sup |T|`
    pub t_sup: f64,
}

/// Compare `T = diag(h_U^{-1} - h_{U2}^{-1})` with its Riemann-sum version
/// `T_ν = diag(𝒢_ν^U - 𝒢_ν^{U2})`.
pub fn riemann_trace_gap(spectral_u: &SpectralData, spectral_u2: &SpectralData, nu: f64) -> Result<TraceGap> {
    if spectral_u.grid() != spectral_u2.grid() || spectral_u.dim() != spectral_u2.dim() {
        return Err(KernelError::GridMismatch);
    }
    if !(nu > 0.0) {
        return Err(KernelError::BadParameter {
            name: "nu",
            reason: format!("must be positive, got {nu}"),
        });
    }
    for sd in [spectral_u, spectral_u2] {
        if !sd.is_complete() {
            return Err(KernelError::BadParameter {
                name: "spectral",
                reason: "trace gap needs the complete spectrum".into(),
            });
        }
    }
    let g1 = diagonal_with(spectral_u, |l| 1.0 / l);
    let g2 = diagonal_with(spectral_u2, |l| 1.0 / l);
    let q1 = diagonal_with(spectral_u, |l| quantum_weight(l, nu, 0.0));
    let q2 = diagonal_with(spectral_u2, |l| quantum_weight(l, nu, 0.0));
    let w = spectral_u.weight();
    let mut gap = 0.0;
    let mut sup: f64 = 0.0;
    for i in 0..g1.len() {
        let t = g1[i] - g2[i];
        let tn = q1[i] - q2[i];
        gap += (t - tn).abs();
        sup = sup.max(t.abs());
    }
    Ok(TraceGap {
        nu,
        gap_l1: gap * w,
        t_sup: sup,
    })
}
