use faer::Mat;
use field_interactions::oracle::{gauss_hermite, two_mode_truncation};
use field_interactions::*;
use green_kernels::{green, Cutoff, KernelMatrix, TAIL_TOL};
use schrodinger_core::{
    assemble_hamiltonian, build_grid, decompose_symmetric, eval_potential, spectral_decompose, Boundary, LatticeGrid,
    PotentialSpec, SpectralData,
};

const KAPPA: f64 = 4.0;

fn trap(n: usize) -> (LatticeGrid, SpectralData) {
    let g = build_grid(1.5, n, Boundary::Dirichlet).unwrap();
    let u = eval_potential(&PotentialSpec::power(12.0, 0.9, KAPPA), &g).unwrap();
    let h = assemble_hamiltonian(&g, &u, KAPPA).unwrap();
    let sd = spectral_decompose(&h, g.sites(), 1e-9, 1.5).unwrap();
    (g, sd)
}

fn full_green(sd: &SpectralData) -> KernelMatrix {
    green(sd, None, Cutoff::Exp, TAIL_TOL).unwrap()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn sampler_reproduces_covariance_within_four_sigma() {
    let (grid, sd) = trap(8);
    let g = full_green(&sd);
    let batch = sample_free_field(&sd, None, Cutoff::Exp, 20_000, 11).unwrap();
    let pairs = [(0, 0), (27, 27), (27, 28), (27, 36), (10, 50)];
    for &(x, y) in &pairs {
        let cov_re: Vec<f64> = (0..batch.len())
            .map(|s| {
                let (a, b) = batch.value(x, s);
                let (c, d) = batch.value(y, s);
                a * c + b * d
            })
            .collect();
        let (m, se) = mean_se(&cov_re);
        assert!((m - g.get(x, y)).abs() < 4.0 * se, "E φφ̄ at ({x},{y}): {m} vs {}", g.get(x, y));
        // E[φ(x) φ(y)] = 0
        let pp: Vec<f64> = (0..batch.len())
            .map(|s| {
                let (a, b) = batch.value(x, s);
                let (c, d) = batch.value(y, s);
                a * c - b * d
            })
            .collect();
        let (m, se) = mean_se(&pp);
        assert!(m.abs() < 4.0 * se, "E φφ at ({x},{y}) = {m}");
    }
    assert_eq!(grid.sites(), batch.sites());
}

#[test]
fn sample_stream_is_independent_of_workers_and_chunking() {
    let (_, sd) = trap(8);
    let cfg = SamplerConfig::new(Some(50.0), Cutoff::Exp, 700, 3);
    let one = FieldSampler::new(&sd, cfg).unwrap();
    let many = FieldSampler::new(&sd, cfg.with_workers(3).with_chunk(97)).unwrap();
    let collect = |s: &FieldSampler| -> Vec<f64> {
        s.map_chunks(|b| (0..b.len()).map(|j| b.re[(5, j)] + 2.0 * b.im[(17, j)]).collect::<Vec<_>>())
            .concat()
    };
    let a = collect(&one);
    let b = collect(&many);
    assert_eq!(a.len(), 700);
    assert_eq!(a, b);
    let whole = sample_free_field(&sd, Some(50.0), Cutoff::Exp, 700, 3).unwrap();
    for j in 0..700 {
        assert_eq!(whole.re[(5, j)] + 2.0 * whole.im[(17, j)], a[j]);
    }
}

#[test]
fn wick_square_has_zero_mean_and_squared_green_covariance() {
    let (_, sd) = trap(8);
    let n = 40.0;
    let gn = green(&sd, Some(n), Cutoff::Exp, TAIL_TOL).unwrap();
    let batch = sample_free_field(&sd, Some(n), Cutoff::Exp, 20_000, 5).unwrap();
    let m = wick_mass(&batch, &gn).unwrap();
    for &(x, y) in &[(27, 27), (27, 28), (20, 44)] {
        let xs: Vec<f64> = (0..batch.len()).map(|s| m[(x, s)]).collect();
        let (mu, se) = mean_se(&xs);
        assert!(mu.abs() < 4.0 * se, "mean {mu} se {se}");
        let prod: Vec<f64> = (0..batch.len()).map(|s| m[(x, s)] * m[(y, s)]).collect();
        let (c, se) = mean_se(&prod);
        let want = gn.get(x, y).powi(2);
        assert!((c - want).abs() < 4.0 * se, "cov ({x},{y}) {c} vs {want}");
    }
    // a kernel with the wrong cutoff is refused
    let wrong = green(&sd, Some(2.0 * n), Cutoff::Exp, TAIL_TOL).unwrap();
    assert!(matches!(wick_mass(&batch, &wrong), Err(FieldError::Mismatch(_))));
}

#[test]
fn interactions_are_gauge_invariant() {
    let (grid, sd) = trap(12);
    let g = full_green(&sd);
    let v = InteractionPotentialSpec::bump(0.8).discretize(grid.spacing()).unwrap();
    let ev = Interactions::new(&g, &grid, &v).unwrap();
    let batch = sample_free_field(&sd, None, Cutoff::Exp, 50, 9).unwrap();
    let rot = batch.rotated(1.234);
    for s in 0..batch.len() {
        let (a, b) = (ev.v_value(&batch, s), ev.v_value(&rot, s));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        let (a, b) = (ev.w_value(&batch, s), ev.w_value(&rot, s));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn zero_field_gives_the_constant_and_samples_respect_the_floor() {
    let (grid, sd) = trap(8);
    let n = 60.0;
    let gn = green(&sd, Some(n), Cutoff::Exp, TAIL_TOL).unwrap();
    let local = LatticeInteraction::local(grid.spacing());
    let ev = Interactions::new(&gn, &grid, &local).unwrap();
    let mut zero = sample_free_field(&sd, Some(n), Cutoff::Exp, 1, 0).unwrap();
    zero.re.fill(0.0);
    zero.im.fill(0.0);
    let d = gn.diag();
    let w = grid.weight();
    // local v: ½ a^4 sum_x (1/a^2)(G_xx^2 + G_xx^2)
    let want: f64 = d.iter().map(|g| g * g).sum::<f64>() * w;
    assert!((ev.v_value(&zero, 0) - want).abs() < 1e-12 * want);
    assert!(ev.floor() < 0.0);
    let batch = sample_free_field(&sd, Some(n), Cutoff::Exp, 2000, 1).unwrap();
    let vals = ev.v_values_checked(&batch).unwrap();
    assert!(vals.iter().all(|&x| x >= ev.floor()));
    let via = interaction_value(&batch, &gn, &grid, InteractionKind::VN, None).unwrap();
    assert_eq!(via.values, vals);
}

#[test]
fn floor_holds_for_adversarial_fields() {
    // V = ½ a^4 sum v (n - G)(n' - G') + ... is minimised by fields of
    // density comparable to G; scan amplitudes of a flat field
    let (grid, sd) = trap(12);
    let g = full_green(&sd);
    let v = InteractionPotentialSpec::bump(0.8).discretize(grid.spacing()).unwrap();
    let ev = Interactions::new(&g, &grid, &v).unwrap();
    let mut b = sample_free_field(&sd, None, Cutoff::Exp, 1, 0).unwrap();
    let d = g.diag();
    for k in 0..=40 {
        let t = k as f64 / 20.0;
        for x in 0..grid.sites() {
            b.re[(x, 0)] = (t * d[x]).sqrt();
            b.im[(x, 0)] = 0.0;
        }
        assert!(ev.v_value(&b, 0) >= ev.floor());
    }
}

#[test]
fn local_tau_is_the_green_diagonal_and_w_is_centred() {
    let (grid, sd) = trap(8);
    let g = full_green(&sd);
    let local = LatticeInteraction::local(grid.spacing());
    let ev = Interactions::new(&g, &grid, &local).unwrap();
    let d = g.diag();
    for (t, gx) in ev.tau().iter().zip(&d) {
        assert!((t - gx).abs() < 1e-12 * gx);
    }
    let (grid, sd) = trap(12);
    let g = full_green(&sd);
    let v = InteractionPotentialSpec::bump(0.8).discretize(grid.spacing()).unwrap();
    let ev = Interactions::new(&g, &grid, &v).unwrap();
    let batch = sample_free_field(&sd, None, Cutoff::Exp, 20_000, 21).unwrap();
    let (m, se) = mean_se(&ev.w_values(&batch));
    assert!(m.abs() < 4.0 * se, "E W = {m} ± {se}");
    let (m, se) = mean_se(&ev.v_values_checked(&batch).unwrap());
    assert!(m.abs() < 4.0 * se, "E V = {m} ± {se}");
}

#[test]
fn homogeneous_tau_grows_like_log_over_pi() {
    // G ~ -(1/π) log r at short range
    let n_c = 256;
    let a = 0.01;
    let eps = [0.04, 0.08, 0.16, 0.32];
    let taus: Vec<f64> = eps
        .iter()
        .map(|&e| tau_homogeneous(&LatticeInteraction::bump(e, a), n_c, KAPPA))
        .collect();
    let xs: Vec<f64> = eps.iter().map(|e: &f64| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 4.0;
    let my = taus.iter().sum::<f64>() / 4.0;
    let slope = xs.iter().zip(&taus).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let want = -1.0 / std::f64::consts::PI;
    assert!((slope - want).abs() < 0.05 * want.abs(), "slope {slope}");
}

#[test]
fn renormalisation_differences_stay_bounded() {
    let (grid, sd) = trap(16);
    let g = full_green(&sd);
    let centre = grid.index(8, 8);
    let mut diffs = Vec::new();
    for e in [0.8, 0.6, 0.4] {
        let r = tau_and_e(&g, &grid, &InteractionPotentialSpec::bump(e), KAPPA).unwrap();
        diffs.push(r.tau[centre] - r.tau0);
        assert!(r.e_eps > 0.0);
    }
    let spread = diffs.iter().cloned().fold(f64::MIN, f64::max) - diffs.iter().cloned().fold(f64::MAX, f64::min);
    // τ^ε itself moves by ~(1/π) log 2 ≈ 0.22 over this range
    assert!(spread < 0.05, "τ - τ0 spread {spread} ({diffs:?})");
    let gn = green(&sd, Some(10.0), Cutoff::Exp, TAIL_TOL).unwrap();
    assert!(matches!(
        tau_and_e(&gn, &grid, &InteractionPotentialSpec::bump(0.5), KAPPA),
        Err(FieldError::Mismatch(_))
    ));
}

#[test]
fn tau_from_banded_columns_matches_dense() {
    let g = build_grid(1.5, 12, Boundary::Dirichlet).unwrap();
    let u = eval_potential(&PotentialSpec::power(12.0, 0.9, KAPPA), &g).unwrap();
    let h = assemble_hamiltonian(&g, &u, KAPPA).unwrap();
    let sd = spectral_decompose(&h, g.sites(), 1e-9, 1.5).unwrap();
    let v = LatticeInteraction::bump(0.6, g.spacing());
    let ev = Interactions::new(&full_green(&sd), &g, &v).unwrap();
    let banded = green_kernels::BandedGreen::new(&h).unwrap();
    let sites = [0, 40, 77, 143];
    let t = tau_at_sites(&banded, &v, &sites);
    for (k, &x) in sites.iter().enumerate() {
        assert!((t[k] - ev.tau()[x]).abs() < 1e-9 * ev.tau()[x].abs());
    }
}

#[test]
fn bump_potential_is_normalised_even_and_positive_type() {
    let a = 0.1;
    for e in [0.2, 0.35, 0.8] {
        let v = LatticeInteraction::bump(e, a);
        assert!((v.mass() - 1.0).abs() < 1e-12);
        assert!(v.offsets().iter().all(|o| o.2 >= 0.0));
        for &(dx, dy, val) in v.offsets() {
            assert_eq!(v.value(-dx, -dy), val);
            assert!((dx as f64).hypot(dy as f64) * a < e + 1e-12);
        }
        for m1 in 0..16 {
            for m2 in 0..16 {
                assert!(v.fourier(32, m1, m2) >= -1e-12);
            }
        }
    }
    assert!(matches!(
        InteractionPotentialSpec::bump(0.15).discretize(0.1),
        Err(FieldError::Unresolved { .. })
    ));
    assert!(InteractionPotentialSpec::local().discretize(0.1).unwrap().is_local());
}

#[test]
fn gauss_hermite_integrates_gaussian_moments() {
    let (x, w) = gauss_hermite(5);
    let m = |k: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
    assert!((m(0) - 1.0).abs() < 1e-14);
    assert!((m(2) - 1.0).abs() < 1e-13);
    assert!((m(4) - 3.0).abs() < 1e-12);
    assert!((m(8) - 105.0).abs() < 1e-10);
    assert!(m(3).abs() < 1e-13);
}

fn toy_system() -> ([f64; 2], Mat<f64>, f64, SparseV) {
    // three sites, weight 1/4; keep the two lowest modes of a chain
    let w = 0.25;
    let h = Mat::from_fn(3, 3, |i, j| match (i as i32 - j as i32).abs() {
        0 => 3.0 + i as f64,
        1 => -1.0,
        _ => 0.0,
    });
    let sd = decompose_symmetric(h.as_ref(), w, 2, 1e-12, 1.5).unwrap();
    let u = sd.vectors().to_owned();
    let e = [sd.eigenvalues()[0], sd.eigenvalues()[1]];
    let sv: SparseV = vec![
        vec![(0, 2.0), (1, 0.7)],
        vec![(0, 0.7), (1, 1.5), (2, 0.3)],
        vec![(1, 0.3), (2, 1.1)],
    ];
    (e, u, w, sv)
}

fn toy_kernel(e: &[f64; 2], u: &Mat<f64>, n: f64, cutoff: Cutoff) -> Mat<f64> {
    Mat::from_fn(3, 3, |x, y| {
        (0..2).map(|k| cutoff.weight(e[k] / n) / e[k] * u[(x, k)] * u[(y, k)]).sum()
    })
}

#[test]
fn wick_contraction_distance_matches_quadrature_oracle() {
    let (e, u, w, sv) = toy_system();
    for (n, m, c) in [(2.0, 8.0, Cutoff::Exp), (5.0, 20.0, Cutoff::Exp), (3.0, 1e3, Cutoff::Sharp)] {
        let exact = l2_truncation_from_kernels(&toy_kernel(&e, &u, n, c), &toy_kernel(&e, &u, m, c), w, &sv);
        let quad = two_mode_truncation(e, &u, w, &sv, n, m, c);
        assert!((exact - quad).abs() <= 1e-8 * quad.max(1e-12), "N={n} M={m}: {exact} vs {quad}");
    }
}

#[test]
fn cross_moment_is_symmetric_and_truncation_distance_vanishes_at_m_equal_n() {
    let (grid, sd) = trap(12);
    let g = full_green(&sd).entries().to_owned();
    let b = LatticeInteraction::bump(0.8, grid.spacing()).stencil(&grid);
    let l = LatticeInteraction::local(grid.spacing()).stencil(&grid);
    let w = grid.weight();
    let ab = cross_moment(&g, w, &b, &l);
    let ba = cross_moment(&g, w, &l, &b);
    assert!((ab - ba).abs() < 1e-12 * ab.abs());
    let v = LatticeInteraction::bump(0.8, grid.spacing());
    assert_eq!(l2_truncation(&sd, &grid, &v, 30.0, 30.0, Cutoff::Exp).unwrap(), 0.0);
    assert!(l2_truncation(&sd, &grid, &v, 30.0, 120.0, Cutoff::Exp).unwrap() > 0.0);
}

#[test]
fn truncation_distance_matches_coupled_monte_carlo() {
    let (grid, sd) = trap(12);
    let (n, m) = (20.0, 80.0);
    let v = LatticeInteraction::bump(0.8, grid.spacing());
    let gn = green(&sd, Some(n), Cutoff::Exp, TAIL_TOL).unwrap();
    let gm = green(&sd, Some(m), Cutoff::Exp, TAIL_TOL).unwrap();
    let en = Interactions::new(&gn, &grid, &v).unwrap();
    let em = Interactions::new(&gm, &grid, &v).unwrap();
    let (bn, bm) = sample_coupled(&sd, n, m, Cutoff::Exp, 40_000, 8).unwrap();
    // the M-field has the covariance of G_M
    let c: Vec<f64> = (0..bm.len()).map(|s| bm.re[(60, s)].powi(2) + bm.im[(60, s)].powi(2)).collect();
    let (mu, se) = mean_se(&c);
    assert!((mu - gm.get(60, 60)).abs() < 4.0 * se);
    let d2: Vec<f64> = (0..bn.len())
        .map(|s| (em.v_value(&bm, s) - en.v_value(&bn, s)).powi(2))
        .collect();
    let (mu, se) = mean_se(&d2);
    let exact = l2_truncation(&sd, &grid, &v, n, m, Cutoff::Exp).unwrap().powi(2);
    assert!((mu - exact).abs() < 4.0 * se, "mc {mu} ± {se} exact {exact}");
    assert!(FieldSampler::increment(&sd, m, n, Cutoff::Exp, 1, 0).is_err());
}

#[test]
fn exact_distances_agree_with_monte_carlo() {
    let (grid, sd) = trap(12);
    let g = full_green(&sd);
    let v = LatticeInteraction::bump(0.8, grid.spacing());
    let local = LatticeInteraction::local(grid.spacing());
    let ev = Interactions::new(&g, &grid, &v).unwrap();
    let el = Interactions::new(&g, &grid, &local).unwrap();
    let batch = sample_free_field(&sd, None, Cutoff::Exp, 40_000, 77).unwrap();
    let wv: Vec<f64> = (0..batch.len())
        .map(|s| (ev.w_value(&batch, s) - ev.v_value(&batch, s)).powi(2))
        .collect();
    let (m, se) = mean_se(&wv);
    let exact = l2_w_minus_v(&g, &grid, &v).unwrap().powi(2);
    assert!((m - exact).abs() < 4.0 * se, "W-V: mc {m} ± {se} exact {exact}");
    let el2: Vec<f64> = (0..batch.len())
        .map(|s| (ev.v_value(&batch, s) - el.v_value(&batch, s)).powi(2))
        .collect();
    let (m, se) = mean_se(&el2);
    let exact = l2_eps_local(&g, &grid, &v).unwrap().powi(2);
    assert!((m - exact).abs() < 4.0 * se, "Vε-V: mc {m} ± {se} exact {exact}");
    let via = l2_distance_exact(&sd, &grid, &v, L2Pair::EpsLocal).unwrap();
    assert!((via * via - exact).abs() < 1e-12 * exact);
}

#[test]
fn floor_constant_bounds_the_tight_floor() {
    let (grid, sd) = trap(8);
    let local = LatticeInteraction::local(grid.spacing());
    let cutoffs = [8.0, 16.0, 32.0, 64.0];
    let fc = FloorConstant::new(&sd, 1.0 + local.l1(), &cutoffs).unwrap();
    assert!((fc.gamma - 0.5).abs() < 1e-12);
    for &n in &cutoffs {
        let gn = green(&sd, Some(n), Cutoff::Exp, TAIL_TOL).unwrap();
        let ev = Interactions::new(&gn, &grid, &local).unwrap();
        assert!(fc.bound(n) <= ev.floor(), "N={n}: {} > {}", fc.bound(n), ev.floor());
    }
    assert!(FloorConstant::new(&sd, 2.0, &[1.0]).is_err());
}

#[test]
fn nelson_tail_is_monotone_and_empty_for_positive_interactions() {
    let tail = nelson_tail(&[0.5, 1.0, 2.0], 10);
    assert!(tail.points.is_empty() && tail.inconclusive && tail.monotone);
    // Gaussian lower tail: -log P ~ s^2/2, exponent ≈ 2 in log log t
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let xs: Vec<f64> = (0..200_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let tail = nelson_tail(&xs, 20);
    assert!(tail.monotone && !tail.inconclusive);
    let e = tail.exponent.unwrap();
    assert!(e > 0.5 && e < 2.5, "exponent {e}");
    assert!(tail.events.iter().zip(&tail.events[1..]).all(|(a, b)| b <= a));
}

#[test]
fn csv_and_batch_persistence_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<InteractionRow> = (0..5)
        .map(|i| InteractionRow {
            sample_index: i,
            v_n: i as f64 * 0.1,
            v_eps: -1.0 / 3.0,
            w_eps: 1e-300,
        })
        .collect();
    let p = dir.path().join("v.csv");
    write_interaction_csv(&p, &rows).unwrap();
    assert_eq!(read_interaction_csv(&p).unwrap(), rows);
    let head = std::fs::read_to_string(&p).unwrap();
    assert!(head.starts_with("sample_index,V_N,V_eps,W_eps"));
    let (_, sd) = trap(8);
    let b = sample_free_field(&sd, Some(20.0), Cutoff::Exp, 4, 2).unwrap();
    save_batch(&dir.path().join("batch"), &b, &sd.checksum()).unwrap();
    let (data, side) = schrodinger_core::persist::read_array(&dir.path().join("batch")).unwrap();
    assert_eq!(side.shape, vec![b.modes.len(), 4, 2]);
    assert_eq!(data[1], b.coords_im[(0, 0)]);
    assert_eq!(side.meta["seed"], 2);
}

#[test]
fn smeared_interaction_requires_a_potential() {
    let (grid, sd) = trap(8);
    let g = full_green(&sd);
    let b = sample_free_field(&sd, None, Cutoff::Exp, 3, 2).unwrap();
    assert!(matches!(
        interaction_value(&b, &g, &grid, InteractionKind::WEps, None),
        Err(FieldError::BadParameter { .. })
    ));
    let w = interaction_value(&b, &g, &grid, InteractionKind::WEps, Some(&InteractionPotentialSpec::bump(0.7))).unwrap();
    assert_eq!(w.values.len(), 3);
    assert_eq!(w.epsilon, Some(0.7));
}
