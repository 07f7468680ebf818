//! Modified Bessel functions of the second kind, used as continuum oracles.

/// `K_ν(z) = ∫_0^∞ e^{-z cosh t} cosh(νt) dt`, trapezoid rule. The integrand
/// decays doubly exponentially, so the rule converges geometrically in the step.
pub fn bessel_k(order: f64, z: f64) -> f64 {
    assert!(z > 0.0, "bessel_k needs z > 0");
    let h = 0.005;
    // stop once z cosh t exceeds the underflow range
    let t_max = ((750.0 / z).max(1.0)).acosh() + 1.0;
    let steps = (t_max / h).ceil() as usize;
    let f = |t: f64| (-z * t.cosh()).exp() * (order * t).cosh();
    let mut acc = 0.5 * f(0.0);
    for k in 1..=steps {
        acc += f(k as f64 * h);
    }
    acc * h
}

pub fn bessel_k0(z: f64) -> f64 {
    bessel_k(0.0, z)
}

pub fn bessel_k1(z: f64) -> f64 {
    bessel_k(1.0, z)
}

/// Continuum Green function of `κ - Δ/2` in the plane: `(1/π) K_0(√(2κ) r)`.
pub fn free_green_2d(kappa: f64, r: f64) -> f64 {
    bessel_k0((2.0 * kappa).sqrt() * r) / std::f64::consts::PI
}

/// `|∇ G|` for the continuum free Green function: `(1/π) √(2κ) K_1(√(2κ) r)`.
pub fn free_green_2d_gradient(kappa: f64, r: f64) -> f64 {
    let m = (2.0 * kappa).sqrt();
    m * bessel_k1(m * r) / std::f64::consts::PI
}

/// Free heat kernel `ψ^t(z) = (2πt)^{-1} e^{-|z|^2/2t}` in two dimensions.
pub fn psi_t(t: f64, r2: f64) -> f64 {
    (-r2 / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t)
}
