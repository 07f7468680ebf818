use bridge_mc::*;
use proptest::prelude::*;
use schrodinger_core::{build_grid, Boundary};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pinning(x in prop::array::uniform2(-5.0f64..5.0), y in prop::array::uniform2(-5.0f64..5.0), t in 0.01f64..3.0, seed in 0u64..1000) {
        let p = sample_bridge(x, y, t, 8, seed).unwrap();
        prop_assert_eq!(p.samples[0], y);
        prop_assert_eq!(p.samples[8], x);
    }

    #[test]
    fn stencil_weights(p in prop::array::uniform2(-1.6f64..1.6)) {
        let grid = build_grid(1.5, 12, Boundary::Dirichlet).unwrap();
        let s = bilinear_stencil(&grid, p);
        let total: f64 = s.iter().map(|w| w.1).sum();
        prop_assert!(total <= 1.0 + 1e-12 && s.iter().all(|w| w.1 >= 0.0));
        let inner = grid.coord(grid.n() - 1);
        if p[0].abs() <= inner && p[1].abs() <= inner {
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_below_free_kernel(x in prop::array::uniform2(-1.0f64..1.0), y in prop::array::uniform2(-1.0f64..1.0), t in 0.05f64..1.0) {
        let u = |p: [f64; 2]| 1.0 + p[0] * p[0];
        let zero = |_: [f64; 2]| 0.0;
        let e = fk_heat_kernel_shared(x, y, t, &[&u, &zero], 2.0, &FkConfig::new(200, 1)).unwrap();
        prop_assert!(e[0].value >= 0.0 && e[0].stderr.is_finite());
        prop_assert!(e[0].value <= e[1].value);
    }
}
