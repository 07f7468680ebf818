//! One-mode toy model: `φ = σ X` with `X` standard complex normal, so
//! `|φ|^2 = σ^2 t` with `t ~ Exp(1)` and every gauge-invariant expectation
//! is a one-dimensional integral over `t` (the radial part of the 2D
//! Gaussian integral).

/// `(ζ, γ_1)` for the interaction `V(|φ|^2)`:
/// `ζ = ∫_0^∞ e^{-t} e^{-V(σ^2 t)} dt`, `γ_1 = ∫ σ^2 t e^{-t} e^{-V} dt / ζ`.
pub fn one_mode_oracle(sigma2: f64, v: impl Fn(f64) -> f64) -> (f64, f64) {
    // composite Simpson on [0, 80]; the integrand is smooth and e^{-t} small beyond
    let n = 200_000;
    let h = 80.0 / n as f64;
    let (mut z, mut g) = (0.0, 0.0);
    for i in 0..=n {
        let t = i as f64 * h;
        let c = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f = (-t - v(sigma2 * t)).exp();
        z += c * f;
        g += c * f * sigma2 * t;
    }
    z *= h / 3.0;
    g *= h / 3.0;
    (z, g / z)
}
