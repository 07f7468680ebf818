use counterterm_solver::*;
use faer::Mat;
use schrodinger_core::persist::read_array;
use schrodinger_core::{assemble_hamiltonian, build_grid, eval_potential, spectral_decompose, Boundary, LatticeGrid, PotentialSpec, SpectralData};

const L: f64 = 1.5;

fn lab() -> (LatticeGrid, PotentialSpec, Vec<f64>) {
    let grid = build_grid(L, 24, Boundary::Dirichlet).unwrap();
    let spec = PotentialSpec::power(12.0, 0.9, 16.0);
    let bare = eval_potential(&spec, &grid).unwrap();
    (grid, spec, bare)
}

fn small(n: usize) -> (LatticeGrid, Vec<f64>) {
    let grid = build_grid(L, n, Boundary::Dirichlet).unwrap();
    let bare = eval_potential(&PotentialSpec::power(12.0, 0.9, 16.0), &grid).unwrap();
    (grid, bare)
}

fn quantum(grid: &LatticeGrid, bare: &[f64], kappa: f64) -> CountertermProblem {
    let eps = 4.0 * grid.spacing();
    CountertermProblem::new(grid, bare.to_vec(), kappa, Regime::Quantum { epsilon: eps, nu: 0.05 }).unwrap()
}

#[test]
fn rho_single_mode() {
    let u = [0.6, 0.8];
    let sd = SpectralData::from_parts(None, 1.0, vec![1.0], Mat::from_fn(2, 1, |i, _| u[i]), 1.5);
    let rho = rho_nu(&sd, 1.0).unwrap();
    let e1 = std::f64::consts::E - 1.0;
    for i in 0..2 {
        assert!((rho[i] - u[i] * u[i] / e1).abs() < 1e-14);
    }
    assert!(rho_nu(&sd, 0.0).is_err());
    assert!(rho_nu(&sd, -1.0).is_err());
}

#[test]
fn rho_small_nu_tends_to_green_diagonal() {
    let (grid, bare) = small(10);
    let sd = spectral_decompose(&assemble_hamiltonian(&grid, &bare, 4.0).unwrap(), grid.sites(), 1e-9, 1.5).unwrap();
    let g = green_kernels::diagonal_with(&sd, |l| 1.0 / l);
    let rho = rho_nu(&sd, 1e-7).unwrap();
    for (r, d) in rho.iter().zip(&g) {
        assert!(*r > 0.0);
        assert!((r - d).abs() < 1e-4 * d, "{r} vs {d}");
    }
}

#[test]
fn homogeneous_shift_gives_scalar_density_difference() {
    let grid = build_grid(L, 12, Boundary::Periodic).unwrap();
    let (kappa, c, nu) = (4.0, 0.7, 0.2);
    let bare = vec![c; grid.sites()];
    let problem = CountertermProblem::new(&grid, bare.clone(), kappa, Regime::Quantum { epsilon: 0.6, nu }).unwrap();
    let e = problem.apply(&bare, 0).unwrap();
    let rho_c = rho_nu_homogeneous(&grid, kappa + c, nu);
    let want_rho = rho_c - rho_nu_homogeneous(&grid, kappa, nu);
    let smeared = problem.interaction().convolve(&grid, &e.rho);
    for x in 0..grid.sites() {
        assert!((smeared[x] - e.rho0 - want_rho).abs() < 1e-12);
        assert!((e.rho[x] - rho_c).abs() < 1e-12);
    }
    let spread = e.image.iter().map(|v| v - c).fold(f64::NEG_INFINITY, f64::max) - e.image.iter().map(|v| v - c).fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-12);
}

#[test]
fn converges_at_kappa_16() {
    let (grid, _, bare) = lab();
    let problem = quantum(&grid, &bare, 16.0);
    let state = solve_counterterm(&problem, None, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(state.converged);
    assert!(state.iterations() <= 50);
    assert!(state.final_residual() <= 1e-10);
    assert!(state.monotone_after(2));
    assert!(state.contraction_history.iter().all(|q| *q < 1.0));
    assert!(state.ball_radius() < 0.5);
    // idempotence
    let again = problem.apply(&state.iterate, 0).unwrap();
    assert!(problem.distance(&again.image, &state.iterate) <= 1e-8);

    let start: Vec<f64> = bare.iter().map(|u| 1.1 * u).collect();
    let second = solve_counterterm(&problem, Some(&start), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(problem.distance(&state.iterate, &second.iterate) <= 10.0 * DEFAULT_TOL);
}

#[test]
fn tiny_kappa_is_reported() {
    let (grid, bare) = small(12);
    let problem = quantum(&grid, &bare, 0.01);
    match solve_counterterm(&problem, None, DEFAULT_TOL, DEFAULT_MAX_ITER) {
        Err(CountertermError::PositivityLost { .. }) | Err(CountertermError::NotContracting { .. }) => {}
        other => panic!("expected failure, got {:?}", other.map(|s| s.iterations())),
    }
}

#[test]
fn max_iter_is_reported() {
    let (grid, bare) = small(10);
    let problem = quantum(&grid, &bare, 16.0);
    assert!(matches!(
        solve_counterterm(&problem, None, 1e-14, 2),
        Err(CountertermError::MaxIter { max_iter: 2, .. })
    ));
    assert!(solve_counterterm(&problem, None, 0.0, 10).is_err());
}

#[test]
fn contraction_improves_with_kappa() {
    let (grid, bare) = small(12);
    let q16 = contraction_probe(&quantum(&grid, &bare, 16.0), 10, 0.5, 3).unwrap();
    let q256 = contraction_probe(&quantum(&grid, &bare, 256.0), 10, 0.5, 3).unwrap();
    assert_eq!(q16.ratios.len(), 10);
    assert!(q256.q < q16.q && q16.q < 1.0, "{} {}", q16.q, q256.q);
}

#[test]
fn feynman_kac_signs() {
    let (grid, bare) = small(12);
    for kappa in [4.0, 16.0] {
        let e = quantum(&grid, &bare, kappa).apply(&bare, 0).unwrap();
        let (t, r) = fk_positivity(&e);
        assert!(t >= -1e-12 && r >= -1e-12, "{t} {r}");
    }
}

#[test]
fn first_step_shrinks_with_kappa() {
    let (grid, bare) = small(12);
    let ks = [4.0, 16.0, 64.0, 256.0];
    let f: Vec<f64> = ks.iter().map(|&k| quantum(&grid, &bare, k).first_step(&bare).unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] < w[0]));
    // at least as fast as the κ^{-1/2} bound
    assert!(loglog_slope(&ks, &f) < -0.5);
}

#[test]
fn limiting_solution_and_sandwich() {
    let (grid, spec, bare) = lab();
    let kappa = 16.0;
    let lim = solve_limiting(&grid, bare.clone(), kappa, DEFAULT_TOL).unwrap();
    assert!(lim.converged);
    // U - 2 (G_U - G_0)(x,x) = 𝒰
    let sd = spectral_decompose(&assemble_hamiltonian(&grid, &lim.iterate, kappa).unwrap(), grid.sites(), 1e-9, 1.5).unwrap();
    let g = green_kernels::diagonal_with(&sd, |l| 1.0 / l);
    let g0 = green_diag_homogeneous(&grid, kappa);
    for x in 0..grid.sites() {
        assert!((lim.iterate[x] - 2.0 * (g[x] - g0) - bare[x]).abs() <= 1e-9 * bare[x]);
    }
    let c = sandwich_constant(&lim.iterate, &bare);
    assert!(c >= 1.0 && c < 2.0);
    assert!(gradient_constant(&lim.iterate, &grid, |x| spec.g_tilde(x)).is_finite());
}

#[test]
fn limit_approached_along_sweep() {
    let (grid, _, bare) = lab();
    let kappa = 16.0;
    let lim = solve_limiting(&grid, bare.clone(), kappa, DEFAULT_TOL).unwrap();
    let mut d = Vec::new();
    for j in 0..3 {
        let nu = 0.1 * 0.5f64.powi(j);
        let p = CountertermProblem::new(&grid, bare.clone(), kappa, Regime::Quantum { epsilon: nu.powf(0.1), nu }).unwrap();
        let s = solve_counterterm(&p, None, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        d.push(p.distance(&s.iterate, &lim.iterate));
    }
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn nonsolvability_cases() {
    let eps = [1.0, 0.8, 0.6];
    let hom = nonsolvability_demo(DemoPotential::Homogeneous, L, 12, 16.0, &[1.5, 1.0], DEFAULT_BAND).unwrap();
    assert!(hom.residuals.iter().all(|r| *r >= 0.0 && *r <= 1e-8));
    let step = nonsolvability_demo(DemoPotential::Step { theta: 12.0 }, L, 20, 16.0, &eps, DEFAULT_BAND).unwrap();
    let floor = step.residuals.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(floor > 1e-3, "{:?}", step.residuals);
    let built = nonsolvability_demo(DemoPotential::Constructed, L, 20, 16.0, &eps, DEFAULT_BAND).unwrap();
    assert!(built.residuals.iter().all(|r| *r <= 1e-8));
    assert!(built.alpha_errors.unwrap().iter().all(|e| *e <= 1e-6));
    assert_eq!(step.epsilons, vec![1.0, 0.8, 0.6]);
    // ε below 4a refused
    assert!(nonsolvability_demo(DemoPotential::Homogeneous, L, 12, 16.0, &[0.5], DEFAULT_BAND).is_err());
}

#[test]
fn constant_target_fits_on_periodic_grid() {
    let grid = build_grid(L, 12, Boundary::Periodic).unwrap();
    let v = field_interactions::LatticeInteraction::bump(1.0, grid.spacing());
    let basis = admissible_basis(&grid, std::f64::consts::PI);
    let (alpha, res) = least_squares_alpha(&grid, &v, &vec![2.0; grid.sites()], &basis).unwrap();
    assert!(res < 1e-12);
    assert!(alpha.iter().all(|a| (a - 2.0).abs() < 1e-10));
    assert!(least_squares_alpha(&grid, &v, &vec![1.0; grid.sites()], &[]).is_err());
}

#[test]
fn log_and_fixed_point_round_trip() {
    let (grid, bare) = small(10);
    let problem = quantum(&grid, &bare, 16.0);
    let state = solve_counterterm(&problem, None, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.json");
    state.write_log(&log).unwrap();
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(rows.len(), state.iterations());
    for key in ["m", "residual", "contraction_ratio", "min_U/bare", "max_U/bare"] {
        assert!(rows[1].get(key).is_some(), "{key}");
    }
    let stem = dir.path().join("fixed");
    state.save_fixed_point(&stem).unwrap();
    let (back, side) = read_array(&stem).unwrap();
    assert_eq!(back, state.iterate);
    assert_eq!(side.meta["converged"], true);
}

#[test]
fn rejects_nonpositive_bare() {
    let (grid, mut bare) = small(10);
    bare[3] = 0.0;
    assert!(CountertermProblem::new(&grid, bare, 16.0, Regime::Limiting).is_err());
}
