use std::f64::consts::{E, PI};

use green_kernels::special::{bessel_k0, bessel_k1, free_green_2d, free_green_2d_gradient, psi_t};
use green_kernels::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schrodinger_core::{
    assemble_hamiltonian, build_grid, eval_potential, spectral_decompose, Boundary, LatticeGrid, OperatorMatrix,
    PotentialSpec, SpectralData,
};

const KAPPA: f64 = 4.0;

fn trap_spec() -> PotentialSpec {
    PotentialSpec::power(12.0, 0.9, KAPPA)
}

fn trap(n: usize) -> (OperatorMatrix, SpectralData) {
    let g = build_grid(1.5, n, Boundary::Dirichlet).unwrap();
    let u = eval_potential(&trap_spec(), &g).unwrap();
    let h = assemble_hamiltonian(&g, &u, KAPPA).unwrap();
    let sd = spectral_decompose(&h, g.sites(), 1e-9, 1.5).unwrap();
    (h, sd)
}

fn periodic_free(n: usize, l: f64) -> (LatticeGrid, SpectralData) {
    let g = build_grid(l, n, Boundary::Periodic).unwrap();
    let h = assemble_hamiltonian(&g, &vec![0.0; g.sites()], KAPPA).unwrap();
    let sd = spectral_decompose(&h, g.sites(), 1e-9, 1.5).unwrap();
    (g, sd)
}

fn max_diff(a: &KernelMatrix, b: &KernelMatrix) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            m = m.max((a.get(i, j) - b.get(i, j)).abs());
        }
    }
    m
}

#[test]
fn bessel_quadrature_matches_tabulated_values() {
    assert!((bessel_k0(1.0) - 0.421_024_438_240_708_3).abs() < 1e-12);
    assert!((bessel_k1(1.0) - 0.601_907_230_197_234_6).abs() < 1e-12);
    assert!((bessel_k0(0.1) - 2.427_069_024_702_017).abs() < 1e-11);
    assert!((bessel_k1(5.0) - 0.004_044_613_445_452_164).abs() < 1e-14);
}

#[test]
fn sharp_cutoff_above_spectrum_is_exact_green() {
    let (_, sd) = trap(12);
    let lmax = *sd.eigenvalues().last().unwrap();
    let g = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let gn = green(&sd, Some(lmax * 1.01), Cutoff::Sharp, TAIL_TOL).unwrap();
    assert_eq!(max_diff(&g, &gn), 0.0);
    assert_eq!(gn.kind(), KernelKind::GreenTruncated);
}

#[test]
fn incomplete_spectrum_trips_tail_tolerance() {
    let (h, _) = trap(12);
    let sd = spectral_decompose(&h, 20, 1e-9, 1.5).unwrap();
    assert!(matches!(green(&sd, None, Cutoff::Exp, 1e-8), Err(KernelError::TailTooLarge { .. })));
    // a tiny N makes the discarded weights negligible
    assert!(green(&sd, Some(0.5), Cutoff::Exp, 1e-8).is_ok());
}

#[test]
fn fft_reference_matches_periodic_spectral_green() {
    let (g, sd) = periodic_free(12, 1.0);
    let dense = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let hk = homogeneous_kernel(12, g.spacing(), KAPPA, |l| 1.0 / l);
    let via_fft = hk.to_kernel_matrix(&g, KernelKind::Green).unwrap();
    assert!(max_diff(&dense, &via_fft) < 1e-10 * dense.max_abs());
}

#[test]
fn homogeneous_green_matches_bessel_k0() {
    let a = 0.05;
    let hk = homogeneous_kernel(128, a, KAPPA, |l| 1.0 / l);
    for k in [6isize, 10, 16, 24, 30] {
        let r = k as f64 * a;
        let want = free_green_2d(KAPPA, r);
        let got = hk.at(k, 0);
        assert!(((got - want) / want).abs() < 0.02, "r={r}: {got} vs {want}");
    }
}

#[test]
fn homogeneous_heat_kernel_matches_gaussian() {
    let a = 0.05;
    let t = 0.25;
    let hk = homogeneous_kernel(128, a, KAPPA, |l| (-t * l).exp());
    for k in [0isize, 4, 10, 14] {
        let r = k as f64 * a;
        let got = hk.at(k, 0) * (KAPPA * t).exp();
        let want = psi_t(t, r * r);
        assert!(((got - want) / want).abs() < 0.03, "r={r}: {got} vs {want}");
    }
}

#[test]
fn exp_truncation_is_monotone_in_n() {
    let (_, sd) = trap(12);
    let g = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let g4 = green(&sd, Some(4.0), Cutoff::Exp, TAIL_TOL).unwrap();
    let g16 = green(&sd, Some(16.0), Cutoff::Exp, TAIL_TOL).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let f: Vec<f64> = (0..g.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q = g.quadratic_form(&f);
        let q4 = g4.quadratic_form(&f);
        let q16 = g16.quadratic_form(&f);
        assert!(q - q16 >= -1e-12 * q && q16 - q4 >= -1e-12 * q);
    }
}

#[test]
fn green_is_positive() {
    let (_, sd) = trap(14);
    let g = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    assert!(g.diag().iter().all(|d| *d > 0.0));
    assert!(g.symmetry_error() < 1e-12 * g.max_abs());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let f: Vec<f64> = (0..g.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!(g.quadratic_form(&f) >= 0.0);
    }
}

#[test]
fn heat_kernel_semigroup_and_small_time() {
    let (h, sd) = trap(12);
    let a2 = h.grid().weight();
    let k0 = heat_kernel(&sd, 1e-8).unwrap();
    for (i, d) in k0.diag().iter().enumerate() {
        assert!((d * a2 - 1.0).abs() < 1e-4, "site {i}: {}", d * a2);
    }
    let (s, t) = (0.3, 0.7);
    let ks = heat_kernel(&sd, s).unwrap();
    let kt = heat_kernel(&sd, t).unwrap();
    let kst = heat_kernel(&sd, s + t).unwrap();
    let prod = (ks.entries() * kt.entries()) * faer::Scale(a2);
    let mut m: f64 = 0.0;
    for i in 0..kst.dim() {
        for j in 0..kst.dim() {
            m = m.max((prod[(i, j)] - kst.get(i, j)).abs());
        }
    }
    assert!(m < 1e-9, "{m}");
}

#[test]
fn feynman_kac_domination() {
    let g = build_grid(1.5, 12, Boundary::Dirichlet).unwrap();
    let u1 = eval_potential(&trap_spec(), &g).unwrap();
    let u2: Vec<f64> = u1.iter().map(|u| 0.5 * u).collect();
    let s1 = spectral_decompose(&assemble_hamiltonian(&g, &u1, KAPPA).unwrap(), 144, 1e-9, 1.5).unwrap();
    let s2 = spectral_decompose(&assemble_hamiltonian(&g, &u2, KAPPA).unwrap(), 144, 1e-9, 1.5).unwrap();
    for t in [0.1, 1.0, 10.0] {
        let k1 = heat_kernel(&s1, t).unwrap();
        let k2 = heat_kernel(&s2, t).unwrap();
        for i in 0..144 {
            for j in 0..144 {
                assert!(k1.get(i, j) <= k2.get(i, j) + 1e-10);
            }
        }
        assert!(k1.min_entry() >= -1e-10);
    }
}

#[test]
fn resolvent_identity() {
    let g = build_grid(1.5, 12, Boundary::Dirichlet).unwrap();
    let u1 = eval_potential(&trap_spec(), &g).unwrap();
    let u2: Vec<f64> = g.positions().iter().map(|x| 1.0 + x[0] * x[0] + 2.0 * x[1].abs()).collect();
    let s1 = spectral_decompose(&assemble_hamiltonian(&g, &u1, KAPPA).unwrap(), 144, 1e-9, 1.5).unwrap();
    let s2 = spectral_decompose(&assemble_hamiltonian(&g, &u2, KAPPA).unwrap(), 144, 1e-9, 1.5).unwrap();
    let g1 = green(&s1, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let g2 = green(&s2, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let w = g.weight();
    let d = faer::Mat::from_fn(144, 144, |i, j| if i == j { w * (u2[i] - u1[i]) } else { 0.0 });
    let rhs = (g1.entries() * d.as_ref()) * g2.entries();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..144 {
        for j in 0..144 {
            let lhs = g1.get(i, j) - g2.get(i, j);
            num += (lhs - rhs[(i, j)]).powi(2);
            den += lhs * lhs;
        }
    }
    assert!((num / den).sqrt() < 1e-8);
}

#[test]
fn quantum_weight_closed_forms() {
    assert!((quantum_weight(1.0, 1.0, 0.0) - 1.0 / (E - 1.0)).abs() < 1e-15);
    assert!((quantum_weight(1.0, 1.0, 0.0) - 0.581_976_706_869_326_4).abs() < 1e-12);
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let w = quantum_weight(0.1 * k as f64, 0.7, 0.0);
        assert!(w < prev);
        prev = w;
    }
    assert!(quantum_weight(1e6, 1.0, 0.0) == 0.0 || quantum_weight(1e6, 1.0, 0.0).is_finite());
    assert!((quantum_weight(2.0, 1.0, 0.5) - (1.0f64).exp() / (2.0f64.exp() - 1.0)).abs() < 1e-14);
}

#[test]
fn quantum_green_limits_and_series() {
    // off the diagonal 𝒢_ν -> G; on it the lattice keeps the delta -ν/(2a^2)
    let (_, sd) = trap(11);
    let g = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let q = quantum_green(&sd, 1e-4, 0.0).unwrap();
    let mut off: f64 = 0.0;
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            if i != j {
                off = off.max((q.get(i, j) - g.get(i, j)).abs());
            }
        }
    }
    assert!(off / g.max_abs() < 1e-3);
    // and the next order is the expansion ν/(e^{νλ}-1) = 1/λ - ν/2 + O(ν^2 λ)
    let w = sd.weight();
    let lmax = *sd.eigenvalues().last().unwrap();
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            let delta = if i == j { 0.5e-4 / w } else { 0.0 };
            assert!((q.get(i, j) - g.get(i, j) + delta).abs() < 1e-8 * lmax / w);
        }
    }
    let (_, sd) = trap(12);
    let nu = 0.2;
    let q = quantum_green(&sd, nu, 0.0).unwrap();
    let lam0 = sd.eigenvalues()[0];
    let n_max = 60;
    let mut series = faer::Mat::<f64>::zeros(q.dim(), q.dim());
    for n in 1..=n_max {
        let hk = heat_kernel(&sd, nu * n as f64).unwrap();
        series += hk.entries() * faer::Scale(nu);
    }
    let tol = (-nu * n_max as f64 * lam0).exp() / (nu * lam0) * sd.eigenvalues().len() as f64;
    let mut m: f64 = 0.0;
    for i in 0..q.dim() {
        for j in 0..q.dim() {
            m = m.max((series[(i, j)] - q.get(i, j)).abs());
        }
    }
    assert!(m <= tol.max(1e-10), "{m} vs {tol}");
    let diag = quantum_green_diagonal(&sd, nu);
    for (i, d) in diag.iter().enumerate() {
        assert!((d - q.get(i, i)).abs() < 1e-12 * d);
    }
    assert!(quantum_green(&sd, nu, 1.0).is_err());
}

#[test]
fn gradient_symmetry_and_isotropy() {
    let (g, sd) = periodic_free(16, 1.2);
    let k = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let grad = green_gradient(&k, &g).unwrap();
    let scale = grad.gx.norm_max();
    for i in 0..g.sites() {
        assert!(grad.norm_at(i, i) < 1e-10 * scale);
    }
    // along axes and diagonals the lattice kernel keeps its reflection symmetry
    let y = g.index(8, 8);
    for (dx, dy) in [(3usize, 0usize), (0, 5), (4, 4), (2, 2)] {
        let x = g.index(8 + dx, 8 + dy);
        let (gx, gy) = (grad.gx[(x, y)], grad.gy[(x, y)]);
        let cross = gx * dy as f64 - gy * dx as f64;
        assert!(cross.abs() < 1e-6 * gx.hypot(gy), "({dx},{dy})");
        // pointing back toward the source
        assert!(gx * (dx as f64) + gy * (dy as f64) < 0.0);
    }
}

#[test]
fn gradient_matches_bessel_k1() {
    let n = 48;
    let l = 2.4;
    let g = build_grid(l, n, Boundary::Periodic).unwrap();
    let hk = homogeneous_kernel(n, g.spacing(), KAPPA, |l| 1.0 / l);
    let k = hk.to_kernel_matrix(&g, KernelKind::Green).unwrap();
    let grad = green_gradient(&k, &g).unwrap();
    let y = g.index(24, 24);
    for d in [5usize, 8, 12] {
        let x = g.index(24 + d, 24);
        let r = d as f64 * g.spacing();
        let want = free_green_2d_gradient(KAPPA, r);
        let got = grad.norm_at(x, y);
        assert!(((got - want) / want).abs() < 0.05, "r={r}: {got} vs {want}");
    }
}

#[test]
fn gradient_rejects_heat_kernel() {
    let (h, sd) = trap(10);
    let k = heat_kernel(&sd, 1.0).unwrap();
    assert!(matches!(green_gradient(&k, h.grid()), Err(KernelError::KindMismatch { .. })));
}

#[test]
fn decay_fit_green_trap() {
    let (_, sd) = trap(16);
    let g = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let fit = fit_decay_bound(&g, &trap_spec(), EnvelopeForm::BoundG).unwrap();
    assert!(fit.fitted_c > 0.0 && fit.fitted_big_c.is_finite());
    assert_eq!(fit.violation_fraction, 0.0);
    let fit2 = fit_decay_bound(&g.scaled(2.0), &trap_spec(), EnvelopeForm::BoundG).unwrap();
    assert!((fit2.fitted_big_c / fit.fitted_big_c - 2.0).abs() < 1e-9);
    assert!((fit2.fitted_c - fit.fitted_c).abs() < 1e-6 * fit.fitted_c);
    let row = serde_json::to_value(&fit).unwrap();
    assert_eq!(row["form"], "prop61_boundG");
    assert!(row.get("C").is_some() && row.get("pairs").is_some());
}

#[test]
fn decay_fit_truncation_difference() {
    let (_, sd) = trap(16);
    let g = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    for n in [4.0, 16.0, 64.0] {
        let gn = green(&sd, Some(n), Cutoff::Exp, TAIL_TOL).unwrap();
        let diff = gn.abs_difference(&g).unwrap();
        let fit = fit_decay_bound(&diff, &trap_spec(), EnvelopeForm::GnMinusG).unwrap();
        assert!(fit.fitted_c > 0.0, "N={n}");
        assert_eq!(fit.violation_fraction, 0.0);
    }
    assert!(matches!(
        fit_decay_bound(&g, &trap_spec(), EnvelopeForm::GnMinusG),
        Err(KernelError::KindMismatch { .. })
    ));
}

#[test]
fn decay_fit_gradient_quantum_and_heat() {
    let (h, sd) = trap(16);
    let spec = trap_spec();
    let g = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let grad = green_gradient(&g, h.grid()).unwrap().norm_kernel(&g);
    let fit = fit_decay_bound(&grad, &spec, EnvelopeForm::GradG).unwrap();
    assert!(fit.fitted_c > 0.0 && fit.violation_fraction == 0.0);
    let q = quantum_green(&sd, 0.05, 0.0).unwrap();
    let fit = fit_decay_bound(&q, &spec, EnvelopeForm::Gnu).unwrap();
    assert!(fit.fitted_c > 0.0 && fit.violation_fraction == 0.0);
    let hk = heat_kernel(&sd, 0.5).unwrap();
    let fit = fit_decay_bound(&hk, &spec, EnvelopeForm::Heat).unwrap();
    assert!(fit.fitted_c > 0.0 && fit.violation_fraction == 0.0);
}

#[test]
fn banded_columns_match_dense_green() {
    let (h, sd) = trap(14);
    let g = green(&sd, None, Cutoff::Exp, TAIL_TOL).unwrap();
    let bg = BandedGreen::new(&h).unwrap();
    for j in [0usize, 50, 97, 195] {
        let col = bg.column(j);
        for i in 0..g.dim() {
            assert!((col[i] - g.get(i, j)).abs() < 1e-12 * g.max_abs());
        }
    }
}

#[test]
fn trace_gap_edge_cases() {
    let g = build_grid(1.5, 12, Boundary::Dirichlet).unwrap();
    let u1 = eval_potential(&trap_spec(), &g).unwrap();
    let u2: Vec<f64> = u1.iter().map(|u| u + 0.5 * (1.0 + u).ln()).collect();
    let s1 = spectral_decompose(&assemble_hamiltonian(&g, &u1, KAPPA).unwrap(), 144, 1e-9, 1.5).unwrap();
    let s2 = spectral_decompose(&assemble_hamiltonian(&g, &u2, KAPPA).unwrap(), 144, 1e-9, 1.5).unwrap();
    let same = riemann_trace_gap(&s1, &s1, 0.01).unwrap();
    assert_eq!(same.gap_l1, 0.0);
    assert_eq!(same.t_sup, 0.0);
    let big = riemann_trace_gap(&s1, &s2, 1e3).unwrap();
    let w = g.weight();
    let g1 = diagonal_with(&s1, |l| 1.0 / l);
    let g2 = diagonal_with(&s2, |l| 1.0 / l);
    let bound: f64 = g1.iter().zip(&g2).map(|(a, b)| (a - b).abs()).sum::<f64>() * w;
    assert!(big.gap_l1.is_finite() && big.gap_l1 <= 2.0 * bound + 1e-12);
    let small = riemann_trace_gap(&s1, &s2, 1e-3).unwrap();
    assert!(small.gap_l1 < big.gap_l1);
}

#[test]
fn kernel_persistence_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (_, sd) = trap(10);
    let g = green(&sd, Some(16.0), Cutoff::Exp, TAIL_TOL).unwrap();
    let stem = dir.path().join("g16");
    let side = g.save(&stem).unwrap();
    assert_eq!(side.meta["kind"], "green_truncated");
    let back = KernelMatrix::load(&stem).unwrap();
    assert_eq!(back.kind(), g.kind());
    assert_eq!(back.params(), g.params());
    assert_eq!(max_diff(&back, &g), 0.0);
}

#[test]
fn pi_appears_in_free_green_normalization() {
    // (1/π) K0 integrates to 1/κ over the plane: 2π ∫ r G(r) dr = 1/κ
    let m = (2.0 * KAPPA).sqrt();
    let h = 1e-3;
    let mut acc = 0.0;
    let mut r = h / 2.0;
    while r < 12.0 / m {
        acc += r * free_green_2d(KAPPA, r) * h;
        r += h;
    }
    assert!((2.0 * PI * acc * KAPPA - 1.0).abs() < 1e-3);
}
