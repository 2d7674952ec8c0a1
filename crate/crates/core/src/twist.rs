//! Points of infinite order on `E` over many disjoint imaginary quadratic fields.
//!
//! For `y² = x³ + ax² + bx + c` with integral coefficients and `M` the product
//! of the conductor primes, put
//! `f(m) = u³ + aM²u² + bM⁴u + cM⁶` with `u = 1 + Mm`. Then `f(m) ≡ 1 (mod M)`
//! and `(u/M², √f(m)/M³)` lies on `E`. Writing `f(m) = d·s²`, each `m` with
//! `f(m) < 0` gives a point over the imaginary field `ℚ(√d)` in which every
//! conductor prime splits. Distinct squarefree parts give linearly disjoint
//! fields, and complex conjugation acts as `−1` on each such point, so
//! points of infinite order over distinct fields are independent.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{kronecker, squarefree_decomposition};
use crate::curve::{
    canonical_height, nontorsion_proof, quadpoint_to_twist, rational_to_string, CurveQ,
    ModelChange, NontorsionProof, Point, QuadPoint,
};
use crate::error::{Error, Result};
use crate::quad::{heegner_hypothesis_disc, HeegnerReport};
use crate::PointQ;

/// `f(x) = Σ coeffs[i]·xⁱ` together with the data it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistPolynomial {
    pub modulus: BigInt,
    pub primes: Vec<u64>,
    /// Coefficients of the integral model `y² = x³ + ax² + bx + c`.
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub coeffs: [BigInt; 4],
}

impl TwistPolynomial {
    pub fn eval(&self, m: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * m + c)
    }

    /// `f(m) − 1` vanishes modulo `M` coefficientwise.
    pub fn congruence_holds(&self) -> bool {
        let mut shifted = self.coeffs.clone();
        shifted[0] -= 1;
        shifted.iter().all(|c| c.is_multiple_of(&self.modulus))
    }

    pub fn curve(&self) -> CurveQ {
        let q = |n: &BigInt| BigRational::from_integer(n.clone());
        let z = BigRational::zero();
        CurveQ::new(
            [z.clone(), q(&self.a), z, q(&self.b), q(&self.c)],
            self.primes.clone(),
        )
        .expect("the polynomial was built from a nonsingular curve")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "M": self.modulus.to_string(),
            "primes": self.primes,
            "curve": [self.a.to_string(), self.b.to_string(), self.c.to_string()],
            "coefficients": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Brings `E` to an integral model `y² = x³ + ax² + bx + c`, returning the
/// coordinate change from the input model.
pub fn prepare_curve(e: &CurveQ) -> (CurveQ, ModelChange) {
    let (a2, ch1) = e.a2_form();
    let (int, ch2) = a2.integral_model();
    (int, ch1.then(&ch2))
}

/// Polynomial in `x` as little-endian coefficients.
fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn build_f(e: &CurveQ, primes: &[u64]) -> Result<TwistPolynomial> {
    if !e.is_a2_form() {
        return Err(Error::NotShortForm(
            "expected y² = x³ + ax² + bx + c; see prepare_curve".into(),
        ));
    }
    if !e.is_integral() {
        return Err(Error::NonIntegral(format!("{}", e.to_json())));
    }
    if primes.is_empty() {
        return Err(Error::Precondition("at least one conductor prime is required".into()));
    }
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != primes.len() {
        return Err(Error::Precondition("conductor primes must be distinct".into()));
    }
    let a = e.eq.a2.to_integer();
    let b = e.eq.a4.to_integer();
    let c = e.eq.a6.to_integer();
    let m: BigInt = sorted.iter().map(|&p| BigInt::from(p)).product();
    let m2 = &m * &m;
    let m4 = &m2 * &m2;
    let m6 = &m4 * &m2;
    let u = vec![BigInt::one(), m.clone()];
    let u2 = poly_mul(&u, &u);
    let u3 = poly_mul(&u2, &u);
    let mut coeffs: [BigInt; 4] = [0, 0, 0, 0].map(BigInt::from);
    for (i, v) in u3.iter().enumerate() {
        coeffs[i] += v;
    }
    for (i, v) in u2.iter().enumerate() {
        coeffs[i] += &a * &m2 * v;
    }
    for (i, v) in u.iter().enumerate() {
        coeffs[i] += &b * &m4 * v;
    }
    coeffs[0] += &c * &m6;
    let t = TwistPolynomial {
        modulus: m,
        primes: sorted,
        a,
        b,
        c,
        coeffs,
    };
    if !t.congruence_holds() {
        return Err(Error::Internal("f ≢ 1 modulo M".into()));
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwistCandidate {
    #[serde(serialize_with = "crate::ser::bigint")]
    pub m: BigInt,
    #[serde(serialize_with = "crate::ser::bigint")]
    pub value: BigInt,
    #[serde(serialize_with = "crate::ser::bigint")]
    pub d: BigInt,
    #[serde(serialize_with = "crate::ser::bigint")]
    pub s: BigInt,
    #[serde(skip)]
    pub point: QuadPoint,
    pub hh: HeegnerReport,
}

impl TwistCandidate {
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        v["point"] = json!({
            "x": rational_to_string(&self.point.x),
            "y0": rational_to_string(&self.point.y0),
            "d": self.point.d.to_string(),
        });
        v
    }
}

/// Why scanned values of `m` were dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ScanStats {
    pub scanned: u64,
    pub nonnegative: u64,
    pub unfactored: u64,
    pub repeated_class: u64,
    pub shares_factor: u64,
    pub not_split: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub max_scan: u64,
    /// Values of `m` factored in parallel per round.
    pub block: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            max_scan: 1_000_000,
            block: 512,
        }
    }
}

/// Discriminant of `ℚ(√d)`.
pub fn field_disc(d: &BigInt) -> BigInt {
    if d.mod_floor(&BigInt::from(4)) == BigInt::one() {
        d.clone()
    } else {
        d * 4
    }
}

pub fn make_point(t: &TwistPolynomial, m: &BigInt) -> Result<QuadPoint> {
    let value = t.eval(m);
    if value.is_zero() {
        return Err(Error::Precondition("f(m) = 0 gives a 2-torsion point".into()));
    }
    let (d, s) = squarefree_decomposition(&value)
        .ok_or_else(|| Error::Precondition(format!("could not factor f({m}) = {value}")))?;
    point_from_parts(t, m, d, s)
}

fn point_from_parts(t: &TwistPolynomial, m: &BigInt, d: BigInt, s: BigInt) -> Result<QuadPoint> {
    let mq = BigRational::from_integer(t.modulus.clone());
    let u = BigRational::from_integer(BigInt::one() + &t.modulus * m);
    let p = QuadPoint {
        x: u / (&mq * &mq),
        y0: BigRational::from_integer(s) / (&mq * &mq * &mq),
        d,
    };
    if !p.satisfies(&t.curve()) {
        return Err(Error::Internal(format!("point for m = {m} is off the curve")));
    }
    Ok(p)
}

pub fn find_candidates(t: &TwistPolynomial, count: usize) -> Result<Vec<TwistCandidate>> {
    find_candidates_with(t, count, ScanOptions::default()).map(|(c, _)| c)
}

/// Scans `m = 0, −1, −2, …` and keeps the first `count` admissible values.
pub fn find_candidates_with(
    t: &TwistPolynomial,
    count: usize,
    opts: ScanOptions,
) -> Result<(Vec<TwistCandidate>, ScanStats)> {
    if count == 0 {
        return Err(Error::Precondition("count must be at least 1".into()));
    }
    let curve = t.curve();
    let disc_m = curve.disc.numer().abs() * &t.modulus;
    let mut stats = ScanStats::default();
    let mut seen: HashSet<BigInt> = HashSet::new();
    let mut out = vec![];
    let mut start = 0u64;
    while start < opts.max_scan {
        let end = (start + opts.block).min(opts.max_scan);
        let block: Vec<(BigInt, BigInt, Option<(BigInt, BigInt)>)> = (start..end)
            .into_par_iter()
            .map(|k| {
                let m = -BigInt::from(k);
                let v = t.eval(&m);
                let parts = if v.is_negative() {
                    squarefree_decomposition(&v)
                } else {
                    None
                };
                (m, v, parts)
            })
            .collect();
        for (m, value, parts) in block {
            stats.scanned += 1;
            if !value.is_negative() {
                stats.nonnegative += 1;
                continue;
            }
            let Some((d, s)) = parts else {
                stats.unfactored += 1;
                continue;
            };
            if seen.contains(&d) {
                stats.repeated_class += 1;
                continue;
            }
            if !d.gcd(&disc_m).is_one() {
                stats.shares_factor += 1;
                continue;
            }
            let disc_k = field_disc(&d);
            let hh = heegner_hypothesis_disc(&t.primes, &disc_k)?;
            if !hh.strong {
                stats.not_split += 1;
                continue;
            }
            debug_assert!(t.primes.iter().all(|&p| kronecker(&disc_k, p) == 1));
            seen.insert(d.clone());
            let point = point_from_parts(t, &m, d.clone(), s.clone())?;
            out.push(TwistCandidate {
                m,
                value,
                d,
                s,
                point,
                hh,
            });
            if out.len() == count {
                return Ok((out, stats));
            }
        }
        start = end;
    }
    Err(Error::BudgetExhausted {
        scanned: stats.scanned,
        found: out.len(),
        wanted: count,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedPoint {
    pub candidate: TwistCandidate,
    pub twist: CurveQ,
    pub twisted_point: PointQ,
    pub proof: NontorsionProof,
    pub height: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceCertificate {
    pub curve: CurveQ,
    pub points: Vec<CertifiedPoint>,
    /// Candidates whose point turned out to be torsion.
    pub rejected: Vec<TwistCandidate>,
    /// Heights on the twists; points over distinct fields pair to zero, so
    /// the Gram matrix is diagonal.
    pub gram_determinant: Option<f64>,
}

impl IndependenceCertificate {
    pub fn rank_bound(&self) -> usize {
        self.points.len()
    }

    pub fn is_valid(&self) -> bool {
        self.rejected.is_empty()
            && self.points.iter().all(|p| p.proof.is_nontorsion())
            && self.gram_determinant.is_none_or(|d| d > 0.0)
    }

    pub fn to_json(&self) -> Value {
        let pt = |p: &PointQ| match p {
            Point::Infinity => json!("infinity"),
            Point::Affine { x, y } => json!([rational_to_string(x), rational_to_string(y)]),
        };
        json!({
            "curve": self.curve.to_json(),
            "valid": self.is_valid(),
            "rank_lower_bound": self.rank_bound(),
            "points": self.points.iter().map(|c| json!({
                "candidate": c.candidate.to_json(),
                "twist": c.twist.to_json(),
                "twisted_point": pt(&c.twisted_point),
                "torsion_bound": c.proof.bound.bound.to_string(),
                "reduction_counts": c.proof.bound.counts.iter()
                    .map(|(p, n)| [p.to_string(), n.to_string()]).collect::<Vec<_>>(),
                "multiple": pt(&c.proof.multiple),
                "height": c.height,
            })).collect::<Vec<_>>(),
            "rejected": self.rejected.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "gram_determinant": self.gram_determinant,
        })
    }
}

/// Certifies each candidate's point as nontorsion on its twist; with
/// `height_eps` also reports canonical heights and the Gram determinant.
pub fn certify_independence(
    e: &CurveQ,
    candidates: &[TwistCandidate],
    height_eps: Option<f64>,
) -> Result<IndependenceCertificate> {
    let mut seen = HashSet::new();
    for c in candidates {
        if !seen.insert(c.d.clone()) {
            return Err(Error::DuplicateSquareClass(c.d.to_string()));
        }
    }
    let results: Vec<Result<(TwistCandidate, Option<CertifiedPoint>)>> = candidates
        .par_iter()
        .map(|c| {
            let (twist, tp) = quadpoint_to_twist(&c.point, e)?;
            let proof = nontorsion_proof(&twist, &tp)?;
            if !proof.is_nontorsion() {
                return Ok((c.clone(), None));
            }
            let height = match height_eps {
                Some(eps) => Some(canonical_height(&twist, &tp, eps)?.value),
                None => None,
            };
            Ok((
                c.clone(),
                Some(CertifiedPoint {
                    candidate: c.clone(),
                    twist,
                    twisted_point: tp,
                    proof,
                    height,
                }),
            ))
        })
        .collect();
    let mut points = vec![];
    let mut rejected = vec![];
    for r in results {
        match r? {
            (_, Some(p)) => points.push(p),
            (c, None) => rejected.push(c),
        }
    }
    let gram_determinant = height_eps.map(|_| points.iter().filter_map(|p| p.height).product());
    Ok(IndependenceCertificate {
        curve: e.clone(),
        points,
        rejected,
        gram_determinant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_37a() -> CurveQ {
        CurveQ::from_ints([0, 0, 0, -16, 16], vec![37]).unwrap()
    }

    #[test]
    fn degenerate_polynomial() {
        // (1 + 5x)³; the curve is singular so build the polynomial by hand
        let t = TwistPolynomial {
            modulus: 5.into(),
            primes: vec![5],
            a: 0.into(),
            b: 0.into(),
            c: 0.into(),
            coeffs: [1, 15, 75, 125].map(BigInt::from),
        };
        assert!(t.congruence_holds());
        assert_eq!(t.eval(&(-1).into()), BigInt::from(-64));
        let (d, s) = squarefree_decomposition(&t.eval(&(-1).into())).unwrap();
        assert_eq!((d, s), (BigInt::from(-1), BigInt::from(8)));
    }

    #[test]
    fn polynomial_37a() {
        let t = build_f(&short_37a(), &[37]).unwrap();
        let m = BigInt::from(37);
        let expect = BigInt::one() - 16 * num_traits::pow(m.clone(), 4) + 16 * num_traits::pow(m, 6);
        assert_eq!(t.eval(&BigInt::zero()), expect);
        assert_eq!(t.eval(&BigInt::zero()), BigInt::from(41021635969i64));
        for k in -50..50 {
            assert!(t.eval(&BigInt::from(k)).mod_floor(&BigInt::from(37)).is_one());
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let long = CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap();
        assert!(matches!(build_f(&long, &[37]), Err(Error::NotShortForm(_))));
        let frac = CurveQ::new(
            [0, 0, 0, 1, 0].map(|n| BigRational::new(n.into(), 2.into())),
            vec![],
        )
        .unwrap();
        assert!(matches!(build_f(&frac, &[3]), Err(Error::NonIntegral(_))));
        let t = build_f(&short_37a(), &[37]).unwrap();
        assert!(find_candidates(&t, 0).is_err());
    }

    #[test]
    fn first_candidates_37a() {
        let t = build_f(&short_37a(), &[37]).unwrap();
        let c = find_candidates(&t, 3).unwrap();
        let ms: Vec<i64> = c.iter().map(|c| i64::try_from(&c.m).unwrap()).collect();
        assert_eq!(ms, vec![-164, -165, -166]);
        assert_eq!(c[1].d, BigInt::from(-208633151i64));
        assert_eq!(c[1].s, BigInt::from(4));
        for cand in &c {
            assert!(cand.hh.strong);
            assert!(cand.point.satisfies(&t.curve()));
        }
        let cert = certify_independence(&t.curve(), &c, Some(1e-6)).unwrap();
        assert!(cert.is_valid());
        assert_eq!(cert.rank_bound(), 3);
    }

    #[test]
    fn duplicate_classes_rejected() {
        let t = build_f(&short_37a(), &[37]).unwrap();
        let c = find_candidates(&t, 1).unwrap();
        let dup = vec![c[0].clone(), c[0].clone()];
        assert!(matches!(
            certify_independence(&t.curve(), &dup, None),
            Err(Error::DuplicateSquareClass(_))
        ));
        let empty = certify_independence(&t.curve(), &[], None).unwrap();
        assert!(empty.is_valid());
        assert_eq!(empty.rank_bound(), 0);
    }

    #[test]
    fn long_form_input_is_prepared() {
        let long = CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap();
        let (prepared, _) = prepare_curve(&long);
        assert_eq!(prepared, short_37a());
    }
}
