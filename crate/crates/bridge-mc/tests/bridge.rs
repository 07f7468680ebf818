use bridge_mc::path::{fill_bridge, path_rng};
use bridge_mc::*;
use schrodinger_core::{assemble_hamiltonian, build_grid, eval_potential, spectral_decompose, Boundary, PotentialSpec};

const KAPPA: f64 = 4.0;

fn trap() -> PotentialSpec {
    PotentialSpec::power(12.0, 0.9, KAPPA)
}

fn oracle(n: usize) -> SpectralOracle {
    let grid = build_grid(1.5, n, Boundary::Dirichlet).unwrap();
    let u = eval_potential(&trap(), &grid).unwrap();
    let sd = spectral_decompose(&assemble_hamiltonian(&grid, &u, KAPPA).unwrap(), grid.sites(), 1e-9, 1.5).unwrap();
    SpectralOracle::new(sd).unwrap()
}

fn boxed(n_paths: usize, seed: u64) -> FkConfig {
    FkConfig {
        domain: Domain::Square { half_width: 1.5 },
        ..FkConfig::new(n_paths, seed)
    }
}

/// Mean and variance of one coordinate at step `k` over many bridges.
fn moments_at(x: [f64; 2], y: [f64; 2], t: f64, steps: usize, k: usize, n: usize, seed: u64, reverse: bool) -> (f64, f64) {
    let mut out = vec![[0.0; 2]; steps + 1];
    let mut scratch = out.clone();
    let (mut s, mut s2) = (0.0, 0.0);
    for p in 0..n {
        fill_bridge(&mut path_rng(seed, p as u64), x, y, t, &mut out, &mut scratch);
        let v = if reverse { out[steps - k][0] } else { out[k][0] };
        s += v;
        s2 += v * v;
    }
    let m = s / n as f64;
    (m, s2 / n as f64 - m * m)
}

#[test]
fn endpoints_are_pinned() {
    let p = sample_bridge([0.3, -0.2], [1.0, 2.0], 0.7, 16, 5).unwrap();
    assert_eq!(p.samples.len(), 17);
    assert_eq!(p.samples[0], [1.0, 2.0]);
    assert_eq!(p.samples[16], [0.3, -0.2]);
    assert_eq!(p.reversed().samples[0], [0.3, -0.2]);
    assert!((p.time(8) - 0.35).abs() < 1e-15);
    assert!(matches!(sample_bridge([0.0; 2], [0.0; 2], 1.0, 7, 0), Err(BridgeError::TooFewSteps(7))));
    assert!(sample_bridge([0.0; 2], [0.0; 2], 0.0, 8, 0).is_err());
}

#[test]
fn midpoint_variance_is_a_quarter() {
    let n = 100_000;
    let (m, var) = moments_at([0.0; 2], [0.0; 2], 1.0, 64, 32, n, 11, false);
    // Var of the sample variance for a Gaussian: 2σ⁴/n
    let se = (2.0 * 0.25f64.powi(2) / n as f64).sqrt();
    assert!((var - 0.25).abs() < 4.0 * se, "{var}");
    assert!(m.abs() < 4.0 * (0.25 / n as f64).sqrt());
}

#[test]
fn reversal_gives_the_opposite_bridge() {
    let (x, y, t, n) = ([1.0, 0.0], [-1.0, 0.0], 1.0, 50_000);
    // bridge from y to x, read at s = t/4
    let (m1, v1) = moments_at(x, y, t, 32, 8, n, 1, false);
    // bridge from x to y reversed, read at the same time
    let (m2, v2) = moments_at(y, x, t, 32, 8, n, 2, true);
    let var = 0.25 * 0.75;
    let se_m = (2.0 * var / n as f64).sqrt();
    let se_v = (2.0 * 2.0 * var * var / n as f64).sqrt();
    assert!((m1 + 0.5).abs() < 4.0 * se_m && (m1 - m2).abs() < 4.0 * se_m, "{m1} {m2}");
    assert!((v1 - v2).abs() < 4.0 * se_v, "{v1} {v2}");
}

#[test]
fn zero_potential_is_exact() {
    let zero = |_: [f64; 2]| 0.0;
    let (x, y, t) = ([0.2, 0.1], [-0.4, 0.3], 0.5);
    let e = fk_heat_kernel(x, y, t, &zero, KAPPA, &FkConfig::new(100, 1)).unwrap();
    let r2 = 0.36 + 0.04;
    let want = (-r2 / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t) * (-KAPPA * t).exp();
    assert!((e.value - want).abs() < 1e-15 * want);
    assert!(e.stderr < 1e-15 * want);
    // the ratio to ψ^t is e^{-κt} ≤ 1 whatever the points
    assert!(e.value / (want * (KAPPA * t).exp()) <= 1.0);
}

#[test]
fn larger_potential_gives_smaller_kernel() {
    let spec = trap();
    let u1 = |x: [f64; 2]| spec.value_at(x).unwrap();
    let u2 = |x: [f64; 2]| 1.5 * spec.value_at(x).unwrap() + 0.1;
    let est = fk_heat_kernel_shared([0.1, 0.0], [0.5, 0.2], 0.8, &[&u1, &u2], KAPPA, &FkConfig::new(2_000, 4)).unwrap();
    assert!(est[0].value > est[1].value);
}

#[test]
fn agrees_with_spectral_oracle() {
    let or = oracle(32);
    let spec = trap();
    let u = |x: [f64; 2]| spec.value_at(x).unwrap();
    for (i, &(x, y, t)) in [([0.0, 0.0], [0.4, 0.1], 0.3), ([0.5, -0.5], [-0.2, 0.3], 0.8), ([0.7, 0.2], [0.7, 0.2], 1.5)]
        .iter()
        .enumerate()
    {
        let e = fk_heat_kernel(x, y, t, &u, KAPPA, &boxed(20_000, i as u64)).unwrap();
        let o = or.heat(x, y, t);
        assert!(e.agrees_with(o, 0.05, 3.0), "{} ± {} vs {o}", e.value, e.stderr);
    }
}

#[test]
fn step_refinement_within_noise() {
    let spec = trap();
    let u = |x: [f64; 2]| spec.value_at(x).unwrap();
    let (x, y, t) = ([0.2, 0.0], [-0.3, 0.4], 0.6);
    let mut cfg = boxed(20_000, 9);
    cfg.steps = Some(64);
    let a = fk_heat_kernel(x, y, t, &u, KAPPA, &cfg).unwrap();
    cfg.steps = Some(128);
    let b = fk_heat_kernel(x, y, t, &u, KAPPA, &cfg).unwrap();
    assert!((a.value - b.value).abs() < 3.0 * a.stderr.hypot(b.stderr));
}

#[test]
fn worker_count_does_not_change_bits() {
    let spec = trap();
    let u = |x: [f64; 2]| spec.value_at(x).unwrap();
    let mut cfg = boxed(3_000, 2);
    cfg.workers = 1;
    let a = fk_heat_kernel([0.0; 2], [0.3, 0.3], 0.5, &u, KAPPA, &cfg).unwrap();
    cfg.workers = 3;
    let b = fk_heat_kernel([0.0; 2], [0.3, 0.3], 0.5, &u, KAPPA, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn density_series() {
    let or = oracle(32);
    let spec = trap();
    let u = |x: [f64; 2]| spec.value_at(x).unwrap();
    let x = [0.2, -0.1];
    let nu = 0.2;
    let cfg = boxed(10_000, 5);
    let want = or.rho_nu(x, nu);
    let one = fk_rho_nu(x, nu, 1, &u, KAPPA, &cfg).unwrap();
    assert!(one.value < want);
    let n = terms_for_tail(nu, KAPPA, 1e-5);
    let full = fk_rho_nu(x, nu, n, &u, KAPPA, &cfg).unwrap();
    assert_eq!(full.target, FkTarget::RhoNu);
    assert!(full.tail_bound.unwrap() < 1e-5);
    assert!(full.agrees_with(want, 0.05, 3.0), "{} ± {} vs {want}", full.value, full.stderr);
    assert!(terms_for_tail(5.0, KAPPA, 1e-6) <= 5);
    assert!(fk_rho_nu(x, 0.0, 3, &u, KAPPA, &cfg).is_err());
}

#[test]
fn increment_moments_bounded() {
    for (x, y) in [([0.0, 0.0], [0.0, 0.0]), ([0.0, 0.0], [3.0, 4.0])] {
        let fit = bridge_moment_fit(x, y, 1.0, 64, 8, 20_000, 3).unwrap();
        assert_eq!(fit.rows.len(), 36);
        assert!(fit.c > 0.5 && fit.c <= 4.0, "{}", fit.c);
    }
    assert!(bridge_moment_fit([0.0; 2], [0.0; 2], 1.0, 64, 7, 10, 0).is_err());
}

fn harmonic_points() -> Vec<([f64; 2], [f64; 2], f64)> {
    let mut pts = Vec::new();
    for &t in &[0.25, 0.5, 1.0] {
        for &r in &[0.0, 1.0, 2.0, 4.0] {
            pts.push(([r, 0.0], [r, 0.5], t));
        }
    }
    pts
}

#[test]
fn heat_envelope_fit() {
    let kappa = 1.0;
    let values: Vec<f64> = harmonic_points()
        .iter()
        .enumerate()
        .map(|(i, &(x, y, t))| {
            let u = |p: [f64; 2]| 1.0 + p[0] * p[0] + p[1] * p[1];
            fk_heat_kernel(x, y, t, &u, kappa, &FkConfig::new(4_000, i as u64)).unwrap().value
        })
        .collect();
    let fit_for = |gamma: f64| {
        let spec = PotentialSpec::power(2.0, gamma, kappa);
        let mut it = values.iter();
        envelope_check_heat(&spec, &harmonic_points(), |_, _, _| Ok(*it.next().unwrap())).unwrap().0
    };
    let lo = fit_for(0.5);
    let hi = fit_for(0.9);
    assert!(lo.fitted_c > 0.0 && lo.violation_fraction == 0.0);
    assert!(hi.fitted_c > 0.0 && hi.violation_fraction == 0.0);
    assert!(hi.fitted_c <= lo.fitted_c * (1.0 + 1e-9), "{} {}", hi.fitted_c, lo.fitted_c);
    // the far point sits under the fitted envelope
    let spec = PotentialSpec::power(2.0, 0.9, kappa);
    let far = values[11];
    let g = spec.g_tilde([4.0, 0.0]);
    let psi = (-0.25f64 / 2.0).exp() / (2.0 * std::f64::consts::PI);
    assert!(far < 4.0 * hi.fitted_big_c * psi * (-hi.fitted_c * 0.5).exp() * ((-hi.fitted_c * g).exp() + 3.0));
}

#[test]
fn csv_round_trip() {
    let rows = vec![FkRow {
        x1: 0.1,
        x2: -0.2,
        y1: 0.3,
        y2: 0.4,
        t: 0.5,
        estimate: 1.25e-3,
        stderr: 2e-6,
        n_paths: 1000,
        steps: 64,
        seed: 7,
    }];
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("fk.csv");
    write_fk_csv(&p, &rows).unwrap();
    assert_eq!(read_fk_csv(&p).unwrap(), rows);
}
