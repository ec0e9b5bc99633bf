use cliffpde_core::clifford::{BladeIndex, SubspaceTag};
use cliffpde_core::grid::{spectrum, synthesize, GridSpec, MultivectorField};
use cliffpde_core::norms::{lorentz_norm, lp_norm};
use cliffpde_core::random::{generate_field, Support};
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = GridSpec> {
    (2usize..=4, prop::sample::select(vec![8usize, 12])).prop_map(|(d, n)| GridSpec::new(d, n).unwrap())
}

fn field(g: GridSpec, m: usize, seed: u64) -> MultivectorField {
    let all = Support::Tag(SubspaceTag::Span((0..1u32 << m).map(BladeIndex).collect()));
    generate_field(g, m, &all, 1.0, g.n / 4, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partial_derivatives_commute(g in grid(), seed in any::<u64>()) {
        let f = field(g, 2, seed);
        for a in 0..g.dim {
            for b in a + 1..g.dim {
                let ab = f.partial_derivative(a).unwrap().partial_derivative(b).unwrap();
                let ba = f.partial_derivative(b).unwrap().partial_derivative(a).unwrap();
                prop_assert!(ab.sub(&ba).unwrap().max_abs() <= 1e-12 * ab.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn inverse_laplacian_inverts_minus_laplacian(g in grid(), seed in any::<u64>()) {
        let f = field(g, 2, seed);
        let back = f.inv_laplacian().unwrap().laplacian().scale(-1.0);
        prop_assert!(back.relative_error(&f).unwrap() <= 1e-10);
    }

    #[test]
    fn transform_round_trip(g in grid(), data in prop::collection::vec(-5.0f64..5.0, 64)) {
        // Tile a short random pattern over the grid.
        let full: Vec<f64> = (0..g.len()).map(|i| data[(i * 7 + i / 3) % data.len()]).collect();
        let back = synthesize(g, &spectrum(g, &full));
        let err = back.iter().zip(&full).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * 5.0);
    }

    #[test]
    fn generated_fields_are_deterministic_and_zero_mean(g in grid(), seed in any::<u64>()) {
        let a = field(g, 3, seed);
        prop_assert_eq!(&a, &field(g, 3, seed));
        prop_assert!(a.means().iter().all(|m| m.abs() <= 1e-14));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lorentz_norm_nonincreasing_in_q(seed in any::<u64>(), p in 1.2f64..6.0) {
        let g = GridSpec::new(2, 16).unwrap();
        let f = generate_field(g, 0, &Support::Scalar, 1.0, 5, seed).unwrap();
        let qs = [0.5, 1.0, 2.0, p, 8.0, f64::INFINITY];
        let mut sorted = qs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let norms: Vec<f64> = sorted.iter().map(|&q| lorentz_norm(&f, p, q).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{norms:?}");
        }
        // L^{p,p} is L^p.
        let lpp = lorentz_norm(&f, p, p).unwrap();
        prop_assert!((lpp - lp_norm(&f, p).unwrap()).abs() <= 1e-12 * lpp);
    }
}
