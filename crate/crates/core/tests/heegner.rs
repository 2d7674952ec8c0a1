use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rankforge::arith::primes_up_to;
use rankforge::heegner::{
    build_an, eval_phi, eval_phi_truncated, heegner_forms, heegner_point, orbit_growth_experiment,
    smallest_split_prime, sqrt_disc_mod_4n, torsion_multiplier, BadPrimeRule, HeegnerOptions, OrbitOptions,
};
use rankforge::mp::{Cx, Mp, Real};
use rankforge::quad::{class_number, QuadOrder};
use rankforge::{CurveQ, Error, Point};

fn e37() -> CurveQ {
    CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap()
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn decimal(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let num: BigInt = format!("{int}{frac}").parse().unwrap();
    BigRational::new(num, num_traits::pow(BigInt::from(10), frac.len()))
}

fn close(x: &Mp, s: &str, tol: f64) -> bool {
    let d = x.to_rational() - decimal(s);
    num_traits::Signed::abs(&d) < BigRational::from_float(tol).unwrap()
}

#[test]
fn coefficients_of_37a_match_point_counts() {
    let m = build_an(&e37(), 2000, &BadPrimeRule::Auto).unwrap();
    let oracle = [-2, -3, 2, -2, 6, -1, 0, 6, 4, -5, -6];
    for (i, &a) in oracle.iter().enumerate() {
        assert_eq!(m.a(i + 2), a, "a_{}", i + 2);
    }
    assert_eq!(m.a(1), 1);
    assert_eq!(m.a(37), -1);
    let z = build_an(&e37(), 100, &BadPrimeRule::Zero).unwrap();
    assert_eq!(z.a(37), 0);
    assert!(!z.warnings.is_empty());
}

#[test]
fn coefficient_invariants_up_to_2000() {
    let n_max = 2000usize;
    let m = build_an(&e37(), n_max, &BadPrimeRule::Auto).unwrap();
    let a = |n: usize| m.a(n);
    for p in primes_up_to(n_max as u64) {
        let p = p as usize;
        if p != 37 {
            assert!((a(p) * a(p)) as usize <= 4 * p);
            let mut pk = p;
            while pk * p <= n_max {
                let next = pk * p;
                assert_eq!(a(next), a(p) * a(pk) - p as i64 * a(pk / p), "n = {next}");
                pk = next;
            }
        }
    }
    for x in 2..=n_max {
        for y in 2..=n_max / x {
            if num_integer::gcd(x, y) == 1 {
                assert_eq!(a(x * y), a(x) * a(y), "{x}·{y}");
            }
        }
    }
}

#[test]
fn heegner_form_for_minus_7() {
    assert_eq!(sqrt_disc_mod_4n(-7, 37).unwrap().rem_euclid(74), 17);
    let forms = heegner_forms(-7, 37, 1).unwrap();
    assert_eq!(forms.len(), 1);
    assert_eq!((forms[0].a, forms[0].b, forms[0].c), (37, 17, 2));
    assert!(matches!(heegner_forms(-19, 37, 1), Err(Error::HeegnerHypothesis(_))));
}

#[test]
fn phi_at_the_heegner_point_matches_direct_summation() {
    let m = build_an(&e37(), 3000, &BadPrimeRule::Auto).unwrap();
    let form = &heegner_forms(-7, 37, 1).unwrap()[0];
    let tau = form.tau(&Mp::new(0.0, 200));
    let z = eval_phi(&m, &tau).unwrap();
    // mpmath summation of Σ aₙ/n qⁿ at 200 bits
    assert!(close(&z.z.re, "0.929592715285395674405199344458958006065", 1e-35));
    assert!(close(&z.z.im, "-1.225694690993395030427112415933262612674", 1e-35));
}

#[test]
fn heegner_point_37a_minus_7() {
    let opts = HeegnerOptions {
        bad_primes: BadPrimeRule::Auto,
        generator: Some(Point::affine(q(0), q(0))),
        ..HeegnerOptions::default()
    };
    let h = heegner_point(&e37(), -7, &opts).unwrap();
    assert!(h.nontorsion);
    assert!(h.trace.curve.contains(&h.trace.point));
    let x = h.trace.point.x().unwrap().clone();
    assert_eq!(x, q(0));
    let ratio = h.height_ratio.unwrap();
    let r = h.ratio_square_root.unwrap() as f64;
    assert!((ratio - r * r).abs() < 1e-6, "{ratio}");
    assert_eq!(h.prec, 128);
}

#[test]
fn insufficient_precision_is_reported() {
    let e11 = CurveQ::from_ints([0, -1, 1, -10, -20], vec![11]).unwrap();
    let opts = HeegnerOptions {
        prec: 64,
        max_prec: 64,
        bad_primes: BadPrimeRule::Auto,
        ..HeegnerOptions::default()
    };
    let err = heegner_point(&e11, -19, &opts).unwrap_err();
    assert!(
        matches!(err, Error::RecognitionFailed(_) | Error::PrecisionUnreachable(_)),
        "{err:?}"
    );
}

#[test]
fn torsion_multiplier_kills_rational_torsion() {
    assert_eq!(torsion_multiplier(&e37(), -7).unwrap(), 1);
    let e11 = CurveQ::from_ints([0, -1, 1, -10, -20], vec![11]).unwrap();
    assert_eq!(torsion_multiplier(&e11, -19).unwrap() % 5, 0);
}

#[test]
fn orbit_images_are_distinct() {
    let p = smallest_split_prime(-7, 37);
    assert_eq!(p, 11);
    let opts = OrbitOptions {
        bad_primes: BadPrimeRule::Auto,
        ..OrbitOptions::default()
    };
    let r = orbit_growth_experiment(&e37(), -7, p, 2, &opts).unwrap();
    assert!(r.all_distinct());
    for row in &r.rows {
        let h = class_number(QuadOrder::new(-7, (p as i64).pow(row.n)).unwrap().d).unwrap();
        assert_eq!(row.distinct as u64, h);
        assert_eq!(row.class_number, h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncation_bound_is_sound(re in -0.5f64..0.5, im in 0.02f64..1.0, terms in 20usize..800) {
        let m = build_an(&e37(), 4000, &BadPrimeRule::Auto).unwrap();
        let tau = Cx::new(re, im);
        let short = eval_phi_truncated(&m, &tau, terms).unwrap();
        let long = eval_phi_truncated(&m, &tau, 4000).unwrap();
        let diff = (short.z - long.z).abs();
        prop_assert!(diff <= 2f64.powf(short.tail_log2) + 1e-12, "{} > 2^{}", diff, short.tail_log2);
    }
}
