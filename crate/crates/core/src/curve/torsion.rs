use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use super::rational::{CurveQ, PointQ};
use super::count::count_points;
use super::Point;
use crate::arith::primes_up_to;
use crate::error::{Error, Result};

/// Primes searched for good reduction.
pub const TORSION_SEARCH_BOUND: u64 = 2000;
const MAX_PRIMES: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionBound {
    pub bound: u64,
    /// `(p, #E(𝔽_p))` for the primes used.
    pub counts: Vec<(u64, u64)>,
}

/// gcd of `#E(𝔽_p)` over good odd primes. For odd `p` of good reduction the
/// whole rational torsion subgroup injects into `E(𝔽_p)`; `p = 2` is skipped
/// because the 2-primary part need not inject there.
pub fn torsion_bound(e: &CurveQ) -> Result<TorsionBound> {
    torsion_bound_below(e, TORSION_SEARCH_BOUND)
}

pub fn torsion_bound_below(e: &CurveQ, search_bound: u64) -> Result<TorsionBound> {
    let mut counts = vec![];
    let mut g = 0u64;
    for p in primes_up_to(search_bound).into_iter().filter(|&p| p > 2) {
        if !e.has_good_reduction(p) {
            continue;
        }
        let n = count_points(&e.reduce(p)?)?;
        g = g.gcd(&n);
        counts.push((p, n));
        if counts.len() >= 2 && (g == 1 || counts.len() >= MAX_PRIMES) {
            break;
        }
    }
    if counts.len() < 2 {
        return Err(Error::NoGoodPrimes(search_bound));
    }
    Ok(TorsionBound { bound: g, counts })
}

/// Witness that `P` has infinite order: the torsion bound `B` and `B·P`.
#[derive(Clone, Debug, PartialEq)]
pub struct NontorsionProof {
    pub bound: TorsionBound,
    pub multiple: PointQ,
}

impl NontorsionProof {
    pub fn is_nontorsion(&self) -> bool {
        !self.multiple.is_infinity()
    }
}

pub fn nontorsion_proof(e: &CurveQ, p: &PointQ) -> Result<NontorsionProof> {
    if !e.contains(p) {
        return Err(Error::PointNotOnCurve);
    }
    let bound = torsion_bound(e)?;
    let multiple = match p {
        Point::Infinity => Point::Infinity,
        _ => e.eq.mul(p, &BigInt::from(bound.bound)),
    };
    Ok(NontorsionProof { bound, multiple })
}

pub fn is_nontorsion(e: &CurveQ, p: &PointQ) -> Result<bool> {
    if p.is_infinity() {
        return Ok(false);
    }
    Ok(nontorsion_proof(e, p)?.is_nontorsion())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn bound_37a_is_one() {
        let e = CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap();
        let b = torsion_bound(&e).unwrap();
        assert_eq!(b.bound, 1);
        assert!(is_nontorsion(&e, &Point::affine(q(0), q(0))).unwrap());
        assert!(!is_nontorsion(&e, &Point::Infinity).unwrap());
    }

    #[test]
    fn four_torsion_detected() {
        let e = CurveQ::from_ints([0, 0, 0, 4, 0], vec![2]).unwrap();
        let b = torsion_bound(&e).unwrap();
        assert_eq!(b.bound % 4, 0);
        assert!(!is_nontorsion(&e, &Point::affine(q(2), q(4))).unwrap());
    }

    #[test]
    fn single_prime_rejected() {
        let e = CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap();
        assert_eq!(torsion_bound_below(&e, 4), Err(Error::NoGoodPrimes(4)));
    }
}
