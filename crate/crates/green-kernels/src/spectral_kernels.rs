use faer::Mat;
use schrodinger_core::SpectralData;

use crate::error::{KernelError, Result};
use crate::kernel::{Cutoff, KernelKind, KernelMatrix, KernelParams};

/// Default bound on the discarded-mode tail of a truncated spectral sum.
pub const TAIL_TOL: f64 = 1e-8;

/// `K = sum_k w(λ_k) u_k u_k^T` over the retained modes.
pub fn spectral_kernel(spectral: &SpectralData, weight: impl Fn(f64) -> f64) -> Mat<f64> {
    let v = spectral.vectors();
    let w: Vec<f64> = spectral.eigenvalues().iter().map(|&l| weight(l)).collect();
    let vw = Mat::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * w[k]);
    &vw * v.transpose()
}

/// Upper bound on `sum_{k >= K} w(λ_k)` for a weight that is nonincreasing in `λ`.
pub fn discarded_tail(spectral: &SpectralData, weight: impl Fn(f64) -> f64) -> f64 {
    let missing = spectral.dim() - spectral.count();
    if missing == 0 {
        return 0.0;
    }
    let last = *spectral.eigenvalues().last().expect("nonempty spectrum");
    missing as f64 * weight(last)
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(KernelError::BadParameter {
            name,
            reason: format!("must be positive, got {x}"),
        })
    }
}

/// Truncated Green function `G_N = sum ϑ(λ/N)/λ u u^T`; `n_cut = None`
/// gives `G = h^{-1}`.
pub fn green(spectral: &SpectralData, n_cut: Option<f64>, cutoff: Cutoff, tail_tol: f64) -> Result<KernelMatrix> {
    if let Some(n) = n_cut {
        check_positive("N", n)?;
    }
    let w = |l: f64| match n_cut {
        Some(n) => cutoff.weight(l / n) / l,
        None => 1.0 / l,
    };
    let tail = discarded_tail(spectral, w);
    if tail > tail_tol {
        return Err(KernelError::TailTooLarge { tail, tol: tail_tol });
    }
    let kind = if n_cut.is_some() {
        KernelKind::GreenTruncated
    } else {
        KernelKind::Green
    };
    let params = KernelParams {
        n_cut,
        cutoff: n_cut.map(|_| cutoff),
        ..Default::default()
    };
    Ok(KernelMatrix::new(
        kind,
        params,
        spectral.grid().cloned(),
        spectral.weight(),
        spectral_kernel(spectral, w),
    ))
}

/// `e^{-th}`.
pub fn heat_kernel(spectral: &SpectralData, t: f64) -> Result<KernelMatrix> {
    check_positive("t", t)?;
    let params = KernelParams {
        t: Some(t),
        ..Default::default()
    };
    Ok(KernelMatrix::new(
        KernelKind::Heat,
        params,
        spectral.grid().cloned(),
        spectral.weight(),
        spectral_kernel(spectral, |l| (-t * l).exp()),
    ))
}

/// Spectral weight `ν e^{t νλ}/(e^{νλ} - 1)`, written so it neither
/// overflows for large `νλ` nor cancels for small `νλ`.
pub fn quantum_weight(lambda: f64, nu: f64, t_partial: f64) -> f64 {
    let x = nu * lambda;
    nu * (-(1.0 - t_partial) * x).exp() / -(-x).exp_m1()
}

/// `𝒢_ν = ν/(e^{νh} - 1)`, or its partial form `ν e^{tνh}/(e^{νh} - 1)`.
pub fn quantum_green(spectral: &SpectralData, nu: f64, t_partial: f64) -> Result<KernelMatrix> {
    check_positive("nu", nu)?;
    if !(0.0..1.0).contains(&t_partial) {
        return Err(KernelError::BadParameter {
            name: "t_partial",
            reason: format!("must lie in [0, 1), got {t_partial}"),
        });
    }
    let kind = if t_partial == 0.0 {
        KernelKind::QuantumGreen
    } else {
        KernelKind::QuantumGreenPartial
    };
    let params = KernelParams {
        nu: Some(nu),
        t_partial: Some(t_partial),
        ..Default::default()
    };
    Ok(KernelMatrix::new(
        kind,
        params,
        spectral.grid().cloned(),
        spectral.weight(),
        spectral_kernel(spectral, |l| quantum_weight(l, nu, t_partial)),
    ))
}

/// Diagonal of `𝒢_ν` without forming the full matrix.
pub fn quantum_green_diagonal(spectral: &SpectralData, nu: f64) -> Vec<f64> {
    diagonal_with(spectral, |l| quantum_weight(l, nu, 0.0))
}

/// Diagonal of `sum w(λ) u u^T`.
pub fn diagonal_with(spectral: &SpectralData, weight: impl Fn(f64) -> f64) -> Vec<f64> {
    let v = spectral.vectors();
    let w: Vec<f64> = spectral.eigenvalues().iter().map(|&l| weight(l)).collect();
    (0..v.nrows())
        .map(|i| (0..v.ncols()).map(|k| w[k] * v[(i, k)] * v[(i, k)]).sum())
        .collect()
}
