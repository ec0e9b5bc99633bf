use cliffpde_core::clifford::{
    lie_algebra_blades, mv_exp, BladeIndex, GaugeElement, Multivector, SubspaceTag,
};
use proptest::prelude::*;

fn multivector(m: usize) -> impl Strategy<Value = Multivector> {
    prop::collection::vec(-3.0f64..3.0, 1 << m).prop_map(move |c| Multivector::from_coeffs(m, c).unwrap())
}

fn lie_element(max_norm: f64) -> impl Strategy<Value = Multivector> {
    prop::collection::vec(-1.0f64..1.0, 10).prop_map(move |c| {
        let mut a = Multivector::zero(4);
        for (b, v) in lie_algebra_blades(4).into_iter().zip(c) {
            a.set_coeff(b, v);
        }
        let n = a.norm();
        if n > max_norm {
            &a * (max_norm / n)
        } else {
            a
        }
    })
}

fn close(a: &Multivector, b: &Multivector, tol: f64) -> bool {
    let scale = a.norm().max(b.norm()).max(1.0);
    (a - b).max_abs() <= tol * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn product_is_associative(
        (a, b, c) in (1usize..=5).prop_flat_map(|m| (multivector(m), multivector(m), multivector(m)))
    ) {
        let lhs = a.mul(&b).unwrap().mul(&c).unwrap();
        let rhs = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn grade_involution_is_automorphism(a in multivector(4), b in multivector(4)) {
        let lhs = a.mul(&b).unwrap().grade_involution();
        let rhs = a.grade_involution().mul(&b.grade_involution()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-14));
    }

    #[test]
    fn projections_are_idempotent(a in multivector(4)) {
        for tag in [SubspaceTag::E4, SubspaceTag::E6, SubspaceTag::E3] {
            let once = a.project(&tag).unwrap();
            prop_assert_eq!(once.project(&tag).unwrap(), once);
        }
        let in_e4_e6 = &a.project(&SubspaceTag::E4).unwrap() + &a.project(&SubspaceTag::E6).unwrap();
        let split = &in_e4_e6.project(&SubspaceTag::E4).unwrap() + &in_e4_e6.project(&SubspaceTag::E6).unwrap();
        prop_assert_eq!(split, in_e4_e6);
    }

    #[test]
    fn exp_times_exp_of_negative_is_one(a in lie_element(2.0)) {
        let prod = mv_exp(&a).unwrap().mul(&mv_exp(&-&a).unwrap()).unwrap();
        prop_assert!((&prod - &Multivector::scalar(4, 1.0)).max_abs() <= 1e-12);
        let g = GaugeElement::from_lie(&a).unwrap();
        prop_assert!(g.inverse_defect().unwrap() <= 1e-12);
    }

    #[test]
    fn e4_conjugates_cl3_by_grade_involution(a in multivector(3)) {
        let e4 = Multivector::generator(4, 4).unwrap();
        let lhs = e4.mul(&a.embed(4).unwrap()).unwrap();
        let rhs = a.grade_involution().embed(4).unwrap().mul(&e4).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-15));
    }

    #[test]
    fn basis_blades_square_to_plus_or_minus_one(mask in 0u32..256) {
        let b = Multivector::basis(8, BladeIndex(mask)).unwrap();
        let sq = b.mul(&b).unwrap();
        let k = mask.count_ones();
        // e_I^2 = (-1)^(k(k+1)/2) for k generators squaring to -1.
        let expect = if (k * (k + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(sq, Multivector::scalar(8, expect));
    }
}
