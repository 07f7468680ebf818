use counterterm_solver::*;
use proptest::prelude::*;
use schrodinger_core::{build_grid, eval_potential, Boundary, PotentialSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn random_pairs_contract(seed in 0u64..1000, kappa in 16.0f64..64.0) {
        let grid = build_grid(1.5, 10, Boundary::Dirichlet).unwrap();
        let bare = eval_potential(&PotentialSpec::power(12.0, 0.9, kappa), &grid).unwrap();
        let p = CountertermProblem::new(&grid, bare, kappa, Regime::Quantum { epsilon: 4.0 * grid.spacing(), nu: 0.05 }).unwrap();
        let probe = contraction_probe(&p, 2, 0.5, seed).unwrap();
        prop_assert!(probe.q < 1.0);
    }

    #[test]
    fn sandwich_at_least_one(v in proptest::collection::vec(0.1f64..10.0, 1..20)) {
        let bare = vec![1.0; v.len()];
        let c = sandwich_constant(&v, &bare);
        prop_assert!(c >= 1.0);
        prop_assert!(v.iter().all(|u| *u <= c && *u >= 1.0 / c));
    }

    #[test]
    fn least_squares_residual_in_unit_interval(t in proptest::collection::vec(-1.0f64..1.0, 64), eps in 0.9f64..1.4) {
        let grid = build_grid(1.5, 8, Boundary::Dirichlet).unwrap();
        prop_assume!(t.iter().any(|x| x.abs() > 1e-3));
        let v = field_interactions::LatticeInteraction::bump(eps, grid.spacing());
        let basis = admissible_basis(&grid, 2.0 * std::f64::consts::PI / eps);
        let (_, r) = least_squares_alpha(&grid, &v, &t, &basis).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r));
    }
}
