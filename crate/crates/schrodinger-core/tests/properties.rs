use proptest::prelude::*;
use schrodinger_core::{assemble_hamiltonian, build_grid, eval_potential, Boundary, PotentialSpec};

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Dirichlet), Just(Boundary::Periodic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coordinates_are_reproducible(l in 0.1f64..20.0, n in 8usize..64, b in boundary()) {
        let g1 = build_grid(l, n, b).unwrap();
        let g2 = build_grid(l, n, b).unwrap();
        prop_assert!(g1.spacing() > 0.0);
        for i in [0, n / 2, n - 1] {
            prop_assert_eq!(g1.coord(i).to_bits(), g2.coord(i).to_bits());
        }
        prop_assert_eq!(g1.checksum(), g2.checksum());
    }

    #[test]
    fn inner_product_is_positive(vals in prop::collection::vec(-5.0f64..5.0, 64)) {
        let g = build_grid(1.0, 8, Boundary::Dirichlet).unwrap();
        let q = g.inner(&vals, &vals);
        let zero = vals.iter().all(|v| *v == 0.0);
        prop_assert!(q > 0.0 || zero);
    }

    #[test]
    fn potentials_are_strictly_positive(theta in 0.5f64..14.0, c in 0.2f64..1.5, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        for spec in [PotentialSpec::power(theta, 0.9, 1.0), PotentialSpec::step(theta, 0.9, 1.0), PotentialSpec::rapid(c, 0.9, 1.0)] {
            let v = spec.value_at([x, y]).unwrap();
            prop_assert!(v >= 1.0 && v.is_finite());
        }
    }

    #[test]
    fn hamiltonian_quadratic_form_exceeds_kappa(vals in prop::collection::vec(-1.0f64..1.0, 100), kappa in 0.1f64..20.0) {
        let g = build_grid(1.5, 10, Boundary::Dirichlet).unwrap();
        let u = eval_potential(&PotentialSpec::power(12.0, 0.9, kappa), &g).unwrap();
        let h = assemble_hamiltonian(&g, &u, kappa).unwrap();
        let mut hv = vec![0.0; 100];
        h.apply(&vals, &mut hv);
        let num: f64 = vals.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let den: f64 = vals.iter().map(|a| a * a).sum();
        prop_assume!(den > 1e-9);
        prop_assert!(num / den >= kappa * (1.0 - 1e-12));
    }
}
