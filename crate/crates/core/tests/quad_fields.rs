use num_bigint::BigInt;
use proptest::prelude::*;
use rankforge::arith::{is_prime_u64, kronecker_i64, squarefree_decomposition};
use rankforge::quad::{
    check_group_axioms, class_group, class_number, compose, enumerate_reduced, order_class_number, power,
    splitting, tower_kernel, QForm, QuadOrder, Splitting,
};
use rankforge::Error;

// direct enumeration of reduced primitive forms
const CLASS_NUMBERS: [(i64, u64); 12] = [
    (-3, 1),
    (-4, 1),
    (-23, 3),
    (-47, 5),
    (-56, 4),
    (-84, 4),
    (-420, 8),
    (-147, 2),
    (-100, 2),
    (-847, 10),
    (-207, 6),
    (-9999, 88),
];

#[test]
fn class_numbers_match_enumeration_oracle() {
    for (d, h) in CLASS_NUMBERS {
        assert_eq!(class_number(d).unwrap(), h, "D = {d}");
        let o = QuadOrder::from_discriminant(d).unwrap();
        assert_eq!(order_class_number(o.d_k, o.f).unwrap(), h, "D = {d}");
    }
}

#[test]
fn class_group_structures() {
    for (d, s) in [(-23, vec![3]), (-47, vec![5]), (-56, vec![4]), (-84, vec![2, 2]), (-420, vec![2, 2, 2])] {
        let cg = class_group(&QuadOrder::from_discriminant(d).unwrap()).unwrap();
        assert_eq!(cg.structure, s, "D = {d}");
    }
}

#[test]
fn composition_is_a_group_law() {
    for d in [-23, -84, -420, -847, -9999] {
        let reps = enumerate_reduced(d).unwrap();
        assert!(check_group_axioms(&reps), "D = {d}");
    }
    let f = QForm::new(2, 1, 3).unwrap();
    assert_eq!(power(&f, 3), QForm::principal(-23).unwrap());
    assert_eq!(compose(&f, &f.inverse()).unwrap(), QForm::principal(-23).unwrap());
}

#[test]
fn invalid_discriminants_are_rejected() {
    assert!(QuadOrder::from_discriminant(-5).is_err());
    assert!(QuadOrder::from_discriminant(5).is_err());
    assert!(QForm::new(1, 0, 0).is_err());
    let f = QForm::new(2, 1, 3).unwrap();
    let g = QForm::principal(-4).unwrap();
    assert!(matches!(compose(&f, &g), Err(Error::MismatchedDiscriminants(..))));
    assert!(matches!(tower_kernel(-7, 7, 2, 1), Err(Error::PrimeDividesDiscriminant(..))));
}

#[test]
fn tower_kernels_match_class_number_ratios() {
    for (dk, p, n, m, order) in [(-7, 3, 2, 1, 3), (-23, 5, 3, 1, 25), (-4, 3, 3, 2, 3), (-3, 7, 2, 1, 7), (-8, 5, 2, 0, 30)] {
        let k = tower_kernel(dk, p, n, m).unwrap();
        assert_eq!(k.order, order, "{dk} {p} {n} {m}");
        assert_eq!(k.is_p_group, m >= 1, "{dk} {p} {n} {m}");
    }
}

#[test]
fn splitting_types() {
    assert_eq!(splitting(-7, 2).unwrap(), Splitting::Split);
    assert_eq!(splitting(-7, 3).unwrap(), Splitting::Inert);
    assert_eq!(splitting(-7, 7).unwrap(), Splitting::Ramified);
    assert_eq!(splitting(-7, 37).unwrap(), Splitting::Split);
}

fn fundamental_negative() -> impl Strategy<Value = i64> {
    (3i64..2000).prop_filter_map("fundamental", |n| {
        QuadOrder::new(-n, 1).ok().map(|o| o.d_k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn class_number_formula(n in 3i64..10_000) {
        let d = -n;
        prop_assume!(d.rem_euclid(4) <= 1);
        let o = QuadOrder::from_discriminant(d).unwrap();
        prop_assert_eq!(order_class_number(o.d_k, o.f).unwrap(), class_number(d).unwrap());
    }

    #[test]
    fn squarefree_part_is_a_square_class_invariant(g in -100_000i64..100_000, h in 1i64..3000) {
        prop_assume!(g != 0);
        let (d1, s1) = squarefree_decomposition(&BigInt::from(g)).unwrap();
        let (d2, s2) = squarefree_decomposition(&(BigInt::from(g) * BigInt::from(h) * BigInt::from(h))).unwrap();
        prop_assert_eq!(&d1, &d2);
        prop_assert_eq!(s2, s1 * BigInt::from(h));
    }

    #[test]
    fn kronecker_is_multiplicative(d in fundamental_negative(), i in 0usize..90, j in 0usize..90) {
        let odd: Vec<u64> = (3u64..500).filter(|&n| is_prime_u64(n)).collect();
        let (p, r) = (odd[i], odd[j]);
        prop_assume!(d % p as i64 != 0 && d % r as i64 != 0);
        prop_assert_eq!(kronecker_i64(d, p * r), kronecker_i64(d, p) * kronecker_i64(d, r));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tower_kernel_is_the_ratio(d in fundamental_negative(), pi in 0usize..8, n in 1u32..4, m in 0u32..3) {
        prop_assume!(m < n);
        let p = [3u64, 5, 7, 11, 13, 17, 19, 23][pi];
        prop_assume!(d % p as i64 != 0);
        prop_assume!((p as i64).pow(n) * (p as i64).pow(n) * d.abs() < 3_000_000);
        let k = tower_kernel(d, p, n, m).unwrap();
        let hn = order_class_number(d, (p as i64).pow(n)).unwrap();
        let hm = order_class_number(d, (p as i64).pow(m)).unwrap();
        prop_assert_eq!(k.order * hm, hn);
        if m >= 1 {
            prop_assert!(k.is_p_group);
        }
    }
}
