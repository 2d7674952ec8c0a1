use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rankforge::arith::primes_up_to;
use rankforge::curve::{canonical_height, count_points, count_points_with, nontorsion_proof, torsion_bound, CountMethod};
use rankforge::heegner::PeriodLattice;
use rankforge::modp::Fp;
use rankforge::mp::{Mp, Real};
use rankforge::{CurveModP, CurveQ, Point, PointQ, Weierstrass};

fn e37() -> CurveQ {
    CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap()
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn gen37() -> PointQ {
    Point::affine(q(0), q(0))
}

fn affine_points(w: &Weierstrass<Fp>, p: u64) -> Vec<Point<Fp>> {
    let mut out = vec![];
    for x in 0..p {
        for y in 0..p {
            let pt = Point::affine(Fp::from_u64(x, p), Fp::from_u64(y, p));
            if w.contains(&pt) {
                out.push(pt);
            }
        }
    }
    out
}

#[test]
fn counts_for_37a_match_brute_force() {
    // a_p for p = 2..11 from the brute-force oracle
    let expected = [(2, -2), (3, -3), (5, -2), (7, -1), (11, -5)];
    let e = e37();
    for (p, ap) in expected {
        let n = count_points(&e.reduce(p).unwrap()).unwrap();
        assert_eq!(p as i64 + 1 - n as i64, ap, "p = {p}");
    }
}

#[test]
fn bsgs_agrees_with_exhaustive_above_threshold() {
    let e = e37();
    for p in [16411u64, 20011, 40009] {
        let r = e.reduce(p).unwrap();
        let a = count_points_with(&r, CountMethod::Exhaustive).unwrap();
        let b = count_points_with(&r, CountMethod::Bsgs).unwrap();
        assert_eq!(a, b, "p = {p}");
    }
}

#[test]
fn bad_prime_is_rejected_by_counting() {
    assert!(count_points(&e37().reduce(37).unwrap()).is_err());
}

#[test]
fn generator_multiples_on_37a() {
    let e = e37();
    let p = gen37();
    let p2 = e.mul(&p, 2);
    assert_eq!(p2, Point::affine(q(1), q(0)));
    let p3 = e.mul(&p, 3);
    assert_eq!(p3, Point::affine(q(-1), q(-1)));
    assert_eq!(e.add(&p2, &e.neg(&p2)).unwrap(), Point::Infinity);
    assert!(nontorsion_proof(&e, &p).unwrap().is_nontorsion());
    assert_eq!(torsion_bound(&e).unwrap().bound, 1);
}

#[test]
fn canonical_height_of_37a_generator() {
    let h = canonical_height(&e37(), &gen37(), 1e-10f64).unwrap();
    assert!((h.value - 0.0511114082399688).abs() < 1e-9, "{}", h.value);
    assert!(h.error_bound <= 1e-10);
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
fn periods_match_quadrature() {
    // mpmath quadrature of dx/√(4x³+b2x²+2b4x+b6) along the real roots
    let proto = Mp::new(0.0, 160);
    let lat = PeriodLattice::new(&e37(), &proto).unwrap();
    assert!(close(&lat.omega1.re, "2.99345864623195962983200883104", 1e-20));
    assert!(close(&lat.omega2.im, "2.45138938198679006085422511936", 1e-20));
    let e11 = CurveQ::from_ints([0, -1, 1, -10, -20], vec![11]).unwrap();
    let lat = PeriodLattice::new(&e11, &proto).unwrap();
    assert!(close(&lat.omega1.re, "1.26920930427955342168879446097", 1e-20));
    assert!(close(&lat.omega2.re, "-0.634604652139776710844397230488", 1e-20));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_axioms_mod_p(pi in 0usize..30, coeffs in prop::array::uniform5(0u64..1000), picks in prop::array::uniform3(0usize..10_000)) {
        let primes: Vec<u64> = primes_up_to(150).into_iter().filter(|&p| p > 3).collect();
        let p = primes[pi % primes.len()];
        let a = coeffs.map(|c| c % p);
        let red = CurveModP::new(p, a);
        prop_assume!(red.good);
        let w = red.weierstrass();
        let pts = affine_points(&w, p);
        prop_assert_eq!(pts.len() as u64 + 1, count_points(&red).unwrap());
        let [i, j, k] = picks.map(|t| pts[t % pts.len()].clone());
        prop_assert_eq!(w.add(&w.add(&i, &j), &k), w.add(&i, &w.add(&j, &k)));
        prop_assert_eq!(w.add(&i, &j), w.add(&j, &i));
        prop_assert_eq!(w.add(&i, &w.neg(&i)), Point::Infinity);
        prop_assert_eq!(w.add(&i, &Point::Infinity), i.clone());
        prop_assert!(w.contains(&w.add(&i, &j)));
        let n = pts.len() as u64 + 1;
        prop_assert_eq!(w.mul_u64(&i, n), Point::Infinity);
    }

    #[test]
    fn hasse_bound(pi in 0usize..300, coeffs in prop::array::uniform5(-50i64..50)) {
        let primes: Vec<u64> = primes_up_to(20_000).into_iter().filter(|&p| p > 3).collect();
        let p = primes[(pi * 7919) % primes.len()];
        let Ok(e) = CurveQ::from_ints(coeffs, vec![]) else { return Ok(()) };
        let red = e.reduce(p).unwrap();
        prop_assume!(red.good);
        let n = count_points(&red).unwrap() as i64;
        let t = p as i64 + 1 - n;
        prop_assert!((t * t) as u64 <= 4 * p, "p = {}, a_p = {}", p, t);
    }

    #[test]
    fn rational_group_law_on_multiples(k in -6i64..7, l in -6i64..7, m in -6i64..7) {
        let e = e37();
        let g = gen37();
        let (pk, pl, pm) = (e.mul(&g, k), e.mul(&g, l), e.mul(&g, m));
        prop_assert_eq!(e.add(&pk, &pl).unwrap(), e.mul(&g, k + l));
        let left = e.add(&e.add(&pk, &pl).unwrap(), &pm).unwrap();
        let right = e.add(&pk, &e.add(&pl, &pm).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert!(e.contains(&pk));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn height_is_quadratic(a in -3i64..4, b in -3i64..4, n in 2i64..5) {
        prop_assume!(a != 0 || b != 0);
        // 389a has rank 2 with generators (-1, 1) and (0, 0)
        let e = CurveQ::from_ints([0, 1, 1, -2, 0], vec![389]).unwrap();
        let g1 = Point::affine(q(-1), q(1));
        let g2 = Point::affine(q(0), q(0));
        let r = e.add(&e.mul(&g1, a), &e.mul(&g2, b)).unwrap();
        let h1 = canonical_height(&e, &r, 1e-10f64).unwrap();
        let hn = canonical_height(&e, &e.mul(&r, n), 1e-10f64).unwrap();
        let tol = hn.error_bound + (n * n) as f64 * h1.error_bound + 1e-9;
        prop_assert!((hn.value - (n * n) as f64 * h1.value).abs() <= tol, "{} vs {}", hn.value, h1.value);
        prop_assert!(h1.value > 0.1);
    }
}
