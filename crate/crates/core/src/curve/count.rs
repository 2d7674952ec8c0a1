use std::collections::HashMap;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Point, Weierstrass};
use crate::arith::sqrt_mod_prime;
use crate::error::{Error, Result};
use crate::modp::Fp;
use crate::scalar::Scalar;

/// Primes below this are counted by enumeration, the rest by baby-step/giant-step.
pub const BSGS_THRESHOLD: u64 = 1 << 14;

/// Reduction of a `p`-integral model modulo `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveModP {
    pub p: u64,
    pub a: [u64; 5],
    pub good: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    Auto,
    Exhaustive,
    Bsgs,
}

impl CurveModP {
    pub fn new(p: u64, a: [u64; 5]) -> Self {
        let a = a.map(|c| c % p);
        let good = !Weierstrass::new(a.map(|c| Fp::from_u64(c, p)))
            .discriminant()
            .is_zero_elem();
        CurveModP { p, a, good }
    }

    pub fn weierstrass(&self) -> Weierstrass<Fp> {
        Weierstrass::new(self.a.map(|c| Fp::from_u64(c, self.p)))
    }

    /// Projective points of the (possibly singular) cubic, singular point included.
    pub fn count_all_points(&self) -> u64 {
        let p = self.p;
        let e = self.weierstrass();
        if p == 2 {
            let mut n = 1;
            for x in 0..2 {
                for y in 0..2 {
                    if e.residual(&Fp::from_u64(x, 2), &Fp::from_u64(y, 2)).v == 0 {
                        n += 1;
                    }
                }
            }
            return n;
        }
        // y² + (a1x + a3)y = g(x) has 1 + χ(disc) solutions, disc = (a1x+a3)² + 4g(x).
        let b2 = e.b2();
        let b4 = e.b4();
        let b6 = e.b6();
        let four = Fp::from_u64(4, p);
        let two = Fp::from_u64(2, p);
        let mut n = 1u64;
        for x in 0..p {
            let x = Fp::from_u64(x, p);
            let d = ((four * x + b2) * x + two * b4) * x + b6;
            n += (1 + d.legendre()) as u64;
        }
        n
    }
}

pub fn count_points(e: &CurveModP) -> Result<u64> {
    count_points_with(e, CountMethod::Auto)
}

pub fn count_points_with(e: &CurveModP, method: CountMethod) -> Result<u64> {
    if !e.good {
        return Err(Error::BadReduction(e.p));
    }
    let bsgs = match method {
        CountMethod::Auto => e.p >= BSGS_THRESHOLD,
        CountMethod::Exhaustive => false,
        CountMethod::Bsgs => true,
    };
    if bsgs && e.p > 457 {
        count_bsgs(e)
    } else {
        Ok(e.count_all_points())
    }
}

fn hasse_interval(p: u64) -> (u64, u64) {
    let t = (4 * p).isqrt();
    (p + 1 - t, p + 1 + t)
}

fn random_point<R: Rng>(e: &Weierstrass<Fp>, p: u64, rng: &mut R) -> Point<Fp> {
    let (b2, b4, b6) = (e.b2(), e.b4(), e.b6());
    let four = Fp::from_u64(4, p);
    let two = Fp::from_u64(2, p);
    loop {
        let x = Fp::from_u64(rng.gen_range(0..p), p);
        let d = ((four * x + b2) * x + two * b4) * x + b6;
        if d.legendre() < 0 {
            continue;
        }
        let s = Fp::from_u64(sqrt_mod_prime(d.v, p).expect("residue has a root"), p);
        let y = (s - e.a1 * x - e.a3) / two;
        debug_assert!(e.residual(&x, &y).v == 0);
        return Point::affine(x, y);
    }
}

/// Some positive `m` with `m·P = O`, searched around the Hasse interval.
fn multiple_of_order(e: &Weierstrass<Fp>, pt: &Point<Fp>, lo: u64, hi: u64) -> u64 {
    let width = hi - lo + 1;
    let s = width.isqrt() + 1;
    let mut baby: HashMap<Point<Fp>, u64> = HashMap::with_capacity(s as usize);
    let mut q = Point::Infinity;
    for j in 0..s {
        baby.entry(q.clone()).or_insert(j);
        q = e.add(&q, pt);
    }
    let giant = e.mul_u64(pt, s);
    let mut r = e.mul_u64(pt, lo);
    for i in 0..=s {
        if let Some(&j) = baby.get(&r) {
            let m = lo + i * s - j;
            if m > 0 {
                return m;
            }
        }
        r = e.add(&r, &giant);
    }
    unreachable!("the group order lies in the Hasse interval")
}

fn point_order(e: &Weierstrass<Fp>, pt: &Point<Fp>, lo: u64, hi: u64) -> u64 {
    let m = multiple_of_order(e, pt, lo, hi);
    e.order_from_multiple(pt, m)
}

/// Mestre's method: lcm of point orders on `E` and its quadratic twist until only
/// one group order in the Hasse interval is compatible with both.
fn count_bsgs(c: &CurveModP) -> Result<u64> {
    let p = c.p;
    let e = c.weierstrass();
    let (lo, hi) = hasse_interval(p);
    let g = (2..p)
        .map(|g| Fp::from_u64(g, p))
        .find(|g| g.legendre() < 0)
        .expect("odd prime has a non-residue");
    let (c4, c6) = (e.c4(), e.c6());
    let k = |n: i64| Fp::new(n, p);
    let twist = Weierstrass::new([
        k(0),
        k(0),
        k(0),
        k(-27) * c4 * g * g,
        k(-54) * c6 * g * g * g,
    ]);
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let (mut l_e, mut l_t) = (1u64, 1u64);
    let two_p2 = 2 * p + 2;
    let compatible = |l_e: u64, l_t: u64| -> Vec<u64> {
        let first = lo.div_ceil(l_e) * l_e;
        (first..=hi)
            .step_by(l_e as usize)
            .filter(|n| (two_p2 - n).is_multiple_of(l_t))
            .take(2)
            .collect()
    };
    for _ in 0..200 {
        let pt = random_point(&e, p, &mut rng);
        l_e = l_e.lcm(&point_order(&e, &pt, lo, hi));
        let cands = compatible(l_e, l_t);
        if cands.len() == 1 {
            return Ok(cands[0]);
        }
        let tp = random_point(&twist, p, &mut rng);
        l_t = l_t.lcm(&point_order(&twist, &tp, two_p2 - hi, two_p2 - lo));
        let cands = compatible(l_e, l_t);
        if cands.len() == 1 {
            return Ok(cands[0]);
        }
    }
    Err(Error::Internal(format!("point counting did not converge at p = {p}")))
}
