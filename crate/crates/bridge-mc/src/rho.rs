//! `ρ_ν(x) = ν Σ_{n≥1} e^{-νnh}(x,x)`, each loop kernel by Feynman–Kac.

use crate::error::{BridgeError, Result};
use crate::fk::{heat_multi_stream, FKEstimate, FkConfig, FkTarget};

/// Bound on `ν Σ_{n>N} e^{-νnh}(x,x)` for `U ≥ 0`, using
/// `e^{-th}(x,x) ≤ e^{-κt}/(2πt)`.
pub fn rho_tail_bound(nu: f64, kappa: f64, n_terms: usize) -> f64 {
    let q = (-nu * kappa).exp();
    let n1 = (n_terms + 1) as f64;
    q.powf(n1) / (2.0 * std::f64::consts::PI * n1 * (1.0 - q))
}

/// Smallest term count whose tail bound is below `tol`.
pub fn terms_for_tail(nu: f64, kappa: f64, tol: f64) -> usize {
    (1..100_000).find(|&n| rho_tail_bound(nu, kappa, n) < tol).unwrap_or(100_000)
}

/// Each term uses its own paths (stream block `n << 32`); variances add.
pub fn fk_rho_nu(
    x: [f64; 2],
    nu: f64,
    n_terms: usize,
    potential: &(dyn Fn([f64; 2]) -> f64 + Sync),
    kappa: f64,
    cfg: &FkConfig,
) -> Result<FKEstimate> {
    if !(nu > 0.0) || n_terms == 0 {
        return Err(BridgeError::BadParameter {
            name: "nu/n_terms",
            reason: format!("need ν > 0 and at least one term, got {nu}, {n_terms}"),
        });
    }
    let mut value = 0.0;
    let mut var = 0.0;
    let mut steps = 0;
    for n in 1..=n_terms {
        let e = heat_multi_stream(x, x, nu * n as f64, &[potential], kappa, cfg, (n as u64) << 32)?[0];
        value += nu * e.value;
        var += (nu * e.stderr).powi(2);
        steps = steps.max(e.steps);
    }
    Ok(FKEstimate {
        value,
        stderr: var.sqrt(),
        n_paths: cfg.n_paths,
        steps,
        target: FkTarget::RhoNu,
        tail_bound: Some(rho_tail_bound(nu, kappa, n_terms)),
    })
}
