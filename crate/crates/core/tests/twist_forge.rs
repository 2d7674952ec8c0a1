use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use proptest::prelude::*;
use rankforge::arith::{kronecker, squarefree_decomposition};
use rankforge::curve::{quadpoint_from_twist, quadpoint_to_twist};
use rankforge::twist::{build_f, certify_independence, field_disc, find_candidates, make_point, prepare_curve};
use rankforge::CurveQ;

fn short_37a() -> CurveQ {
    CurveQ::from_ints([0, 0, 0, -16, 16], vec![37]).unwrap()
}

// (m, f(m), d, s) from the descending exact scan with sympy factorisation
const SCAN_37A: [(i64, i64, i64, i64); 25] = [
    (-164, -336923627, -336923627, 1),
    (-165, -3338130416, -208633151, 4),
    (-166, -6389475461, -6389475461, 1),
    (-168, -12643795991, -12643795991, 1),
    (-169, -15847379312, -990461207, 4),
    (-170, -19102316561, -19102316561, 1),
    (-172, -25767468515, -25767468515, 1),
    (-173, -29178291056, -1823643191, 4),
    (-174, -32641683197, -32641683197, 1),
    (-176, -39727391951, -39727391951, 1),
    (-177, -43350316400, -108375791, 20),
    (-178, -47027026121, -47027026121, 1),
    (-180, -54543017051, -54543017051, 1),
    (-181, -58382906096, -3648931631, 4),
    (-182, -62277796085, -62277796085, 1),
    (-184, -70233794567, -70233794567, 1),
    (-185, -74295510896, -4643469431, 4),
    (-186, -78413443841, -78413443841, 1),
    (-188, -86819175251, -86819175251, 1),
    (-189, -91107581552, -5694223847, 4),
    (-190, -95453420141, -95453420141, 1),
    (-192, -104318609855, -104318609855, 1),
    (-193, -108838568816, -6802410551, 4),
    (-194, -113417175737, -113417175737, 1),
    (-196, -122751549131, -122751549131, 1),
];

#[test]
fn scan_matches_oracle() {
    let t = build_f(&short_37a(), &[37]).unwrap();
    let c = find_candidates(&t, 25).unwrap();
    assert_eq!(c.len(), 25);
    for (cand, &(m, v, d, s)) in c.iter().zip(SCAN_37A.iter()) {
        assert_eq!(cand.m, BigInt::from(m));
        assert_eq!(cand.value, BigInt::from(v));
        assert_eq!(cand.d, BigInt::from(d));
        assert_eq!(cand.s, BigInt::from(s));
        assert_eq!(kronecker(&field_disc(&cand.d), 37), 1, "m = {m}");
    }
}

#[test]
fn certificate_with_heights() {
    let e = short_37a();
    let t = build_f(&e, &[37]).unwrap();
    let c = find_candidates(&t, 4).unwrap();
    let cert = certify_independence(&e, &c, Some(1e-6)).unwrap();
    assert!(cert.is_valid());
    assert_eq!(cert.rank_bound(), 4);
    assert!(cert.gram_determinant.unwrap() > 0.0);
    for p in &cert.points {
        assert!(p.height.unwrap() > 0.0);
        assert!(p.twist.contains(&p.twisted_point));
    }
}

#[test]
fn twist_round_trip() {
    let e = short_37a();
    let t = build_f(&e, &[37]).unwrap();
    let p = make_point(&t, &BigInt::from(-165)).unwrap();
    let (tw, q) = quadpoint_to_twist(&p, &e).unwrap();
    assert!(tw.contains(&q));
    assert_eq!(quadpoint_from_twist(&e, &p.d, &q).unwrap(), p);
}

#[test]
fn long_model_is_moved_to_short_form() {
    let (e, ch) = prepare_curve(&CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap());
    assert_eq!(e, short_37a());
    // the generator (0, 0) lands on an integral point of the short model
    let g = rankforge::Point::affine(num_rational::BigRational::from_integer(0.into()), num_rational::BigRational::from_integer(0.into()));
    assert!(e.contains(&ch.apply_point(&g)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn congruence_and_leading_coefficient(a in -40i64..40, b in -40i64..40, pi in 0usize..6, m in -100_000i64..100_000) {
        let primes = [3u64, 5, 7, 11, 13, 37];
        let p = primes[pi];
        let Ok(e) = CurveQ::from_ints([0, 0, 0, a, b], vec![p]) else { return Ok(()) };
        let t = build_f(&e, &[p]).unwrap();
        prop_assert!(t.congruence_holds());
        let v = t.eval(&BigInt::from(m));
        prop_assert!(v.mod_floor(&BigInt::from(p)).is_one());
        prop_assert_eq!(&t.coeffs[3], &num_traits::pow(BigInt::from(p), 3));
    }

    #[test]
    fn points_lie_on_the_curve(m in -3000i64..-1) {
        let e = short_37a();
        let t = build_f(&e, &[37]).unwrap();
        let p = make_point(&t, &BigInt::from(m)).unwrap();
        prop_assert!(p.satisfies(&e));
        let (d, s) = squarefree_decomposition(&t.eval(&BigInt::from(m))).unwrap();
        prop_assert_eq!(&p.d, &d);
        prop_assert_eq!(d * &s * &s, t.eval(&BigInt::from(m)));
    }
}
