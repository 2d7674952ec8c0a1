use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankforge::dihedral::{
    exhaustive_actions, involution_lift_count, make_gen_dihedral, random_candidate_action,
    verify_minus_one_argument, FiniteAbelian, ModMatrix, ModuleAction, EXHAUSTIVE_LIMIT,
};
use rankforge::quad::{class_group, QuadOrder};
use rankforge::Error;

fn ab(f: &[u64]) -> FiniteAbelian {
    FiniteAbelian::new(f.to_vec()).unwrap()
}

/// Odd-order `A` with `|A| ≤ 200`, one to three cyclic factors.
fn odd_group() -> impl Strategy<Value = FiniteAbelian> {
    prop::collection::vec((1u64..50).prop_map(|k| 2 * k + 1), 1..4)
        .prop_filter("order at most 200", |f| f.iter().product::<u64>() <= 200)
        .prop_map(|f| ab(&f))
}

/// Modules with `|M| ≤ 10⁴`.
fn module() -> impl Strategy<Value = FiniteAbelian> {
    prop::collection::vec(2u64..100, 1..3)
        .prop_filter("order at most 10^4", |f| f.iter().product::<u64>() <= 10_000)
        .prop_map(|f| ab(&f))
}

/// Runs the argument on `act`; a relation failure means `act` is not an action.
fn outcome(a: &FiniteAbelian, act: &ModuleAction) -> Option<(bool, bool)> {
    match verify_minus_one_argument(a, act) {
        Ok(r) => Some((r.tau_sq_trivial, r.fixed_all)),
        Err(Error::Precondition(_)) => None,
        Err(e) => panic!("{e:?}"),
    }
}

#[test]
fn class_group_of_minus_23_gives_s3() {
    let a = FiniteAbelian::from_class_group(&class_group(&QuadOrder::from_discriminant(-23).unwrap()).unwrap());
    let g = make_gen_dihedral(&a).unwrap();
    assert_eq!(g.order(), 6);
    assert!(!g.is_abelian());
    assert!(g.inversion_relation_holds() && g.reflections_are_involutions());
    assert_eq!(involution_lift_count(&g), 3);
}

#[test]
fn exhaustive_on_f7_squared() {
    let a = ab(&[3]);
    let m = ab(&[7, 7]);
    let acts = exhaustive_actions(&a, &m, EXHAUSTIVE_LIMIT).unwrap();
    assert_eq!(acts.len(), 1);
    assert_eq!(outcome(&a, &acts[0]), Some((true, true)));
}

#[test]
fn even_order_is_rejected() {
    for f in [vec![2], vec![4], vec![2, 2], vec![3, 6]] {
        let a = ab(&f);
        let act = ModuleAction::minus_sigma_trivial(&a, &ab(&[5]));
        assert!(matches!(verify_minus_one_argument(&a, &act), Err(Error::Precondition(_))), "{f:?}");
        assert!(!a.squaring_is_bijective());
    }
}

#[test]
fn sigma_other_than_minus_one_is_rejected() {
    let a = ab(&[3]);
    let m = ab(&[7]);
    let mut act = ModuleAction::minus_sigma_trivial(&a, &m);
    act.sigma = ModMatrix::identity(&m);
    assert!(verify_minus_one_argument(&a, &act).is_err());
}

#[test]
fn even_order_has_nontrivial_actions() {
    // for |A| = 2 the relation allows τ ↦ −id on ℤ/5, which moves points
    let a = ab(&[2]);
    let m = ab(&[5]);
    let acts = exhaustive_actions(&a, &m, EXHAUSTIVE_LIMIT).unwrap();
    assert!(acts.iter().any(|act| act.taus[0] == ModMatrix::minus_identity(&m)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn minus_one_forces_trivial_action(a in odd_group(), m in module(), seed in any::<u64>()) {
        let g = make_gen_dihedral(&a).unwrap();
        prop_assert!(g.inversion_relation_holds());
        prop_assert!(g.reflections_are_involutions());
        prop_assert!(a.squaring_is_bijective());
        prop_assert_eq!(involution_lift_count(&g), a.order());

        let mut actions = vec![ModuleAction::minus_sigma_trivial(&a, &m)];
        if let Ok(all) = exhaustive_actions(&a, &m, EXHAUSTIVE_LIMIT) {
            actions.extend(all);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        actions.extend((0..4).map(|_| random_candidate_action(&a, &m, &mut rng)));
        let mut valid = 0;
        for act in &actions {
            if let Some(r) = outcome(&a, act) {
                prop_assert_eq!(r, (true, true));
                valid += 1;
            }
        }
        prop_assert!(valid >= 1);
    }
}
