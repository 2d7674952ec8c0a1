use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

use super::{CurveModP, Point, Weierstrass};
use crate::arith::{is_prime_u64, mod_u64};
use crate::error::{Error, Result};

pub use crate::PointQ;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Accepts `"-3"`, `"7/4"` and finite decimals such as `"0.125"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            digits => digits.parse().map_err(|_| bad())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let v = BigRational::new(int_part * &den + frac_part, den);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn rational_to_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Coordinate change `x = u²x' + r`, `y = u³y' + s·u²x' + t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelChange {
    pub u: BigRational,
    pub r: BigRational,
    pub s: BigRational,
    pub t: BigRational,
}

impl ModelChange {
    pub fn identity() -> Self {
        ModelChange {
            u: q(1),
            r: q(0),
            s: q(0),
            t: q(0),
        }
    }

    pub fn scaling(u: BigRational) -> Self {
        ModelChange {
            u,
            ..Self::identity()
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ModelChange) -> ModelChange {
        let (u1, r1, s1, t1) = (&self.u, &self.r, &self.s, &self.t);
        let (u2, r2, s2, t2) = (&next.u, &next.r, &next.s, &next.t);
        let u1sq = u1 * u1;
        ModelChange {
            u: u1 * u2,
            r: &u1sq * r2 + r1,
            s: u1 * s2 + s1,
            t: &u1sq * u1 * t2 + s1 * &u1sq * r2 + t1,
        }
    }

    pub fn apply_curve(&self, e: &Weierstrass<BigRational>) -> Weierstrass<BigRational> {
        let (u, r, s, t) = (&self.u, &self.r, &self.s, &self.t);
        let (a1, a2, a3, a4, a6) = (&e.a1, &e.a2, &e.a3, &e.a4, &e.a6);
        let u2 = u * u;
        let u3 = &u2 * u;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        Weierstrass {
            a1: (a1 + s * q(2)) / u,
            a2: (a2 - s * a1 + r * q(3) - s * s) / &u2,
            a3: (a3 + r * a1 + t * q(2)) / &u3,
            a4: (a4 - s * a3 + r * a2 * q(2) - (t + r * s) * a1 + r * r * q(3) - s * t * q(2))
                / &u4,
            a6: (a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1) / &u6,
        }
    }

    /// Old coordinates to new.
    pub fn apply_point(&self, p: &PointQ) -> PointQ {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => {
                let u2 = &self.u * &self.u;
                let xr = x - &self.r;
                let xn = &xr / &u2;
                let yn = (y - &self.s * &xr - &self.t) / (&u2 * &self.u);
                Point::Affine { x: xn, y: yn }
            }
        }
    }

    /// New coordinates to old.
    pub fn pull_back(&self, p: &PointQ) -> PointQ {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => {
                let u2 = &self.u * &self.u;
                let xo = &u2 * x + &self.r;
                let yo = &u2 * &self.u * y + &self.s * &u2 * x + &self.t;
                Point::Affine { x: xo, y: yo }
            }
        }
    }
}

/// Elliptic curve over ℚ with the primes of its conductor.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveQ {
    pub eq: Weierstrass<BigRational>,
    pub disc: BigRational,
    pub conductor_primes: Vec<u64>,
}

impl CurveQ {
    pub fn new(coeffs: [BigRational; 5], conductor_primes: Vec<u64>) -> Result<Self> {
        Self::from_weierstrass(Weierstrass::new(coeffs), conductor_primes)
    }

    pub fn from_weierstrass(
        eq: Weierstrass<BigRational>,
        mut conductor_primes: Vec<u64>,
    ) -> Result<Self> {
        let disc = eq.discriminant();
        if disc.is_zero() {
            return Err(Error::Singular);
        }
        conductor_primes.sort_unstable();
        if conductor_primes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition(
                "conductor primes must be distinct".into(),
            ));
        }
        if let Some(&p) = conductor_primes.iter().find(|&&p| !is_prime_u64(p)) {
            return Err(Error::Precondition(format!("{p} is not prime")));
        }
        Ok(CurveQ {
            eq,
            disc,
            conductor_primes,
        })
    }

    pub fn from_ints(coeffs: [i64; 5], conductor_primes: Vec<u64>) -> Result<Self> {
        Self::new(coeffs.map(q), conductor_primes)
    }

    /// Parses `[a1, a2, a3, a4, a6]`; entries may be decimal strings or JSON integers.
    pub fn from_json(text: &str, conductor_primes: Vec<u64>) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let arr = v
            .as_array()
            .filter(|a| a.len() == 5)
            .ok_or_else(|| Error::Parse("curve must be a JSON array of 5 coefficients".into()))?;
        let mut coeffs = Vec::with_capacity(5);
        for c in arr {
            coeffs.push(match c {
                Value::String(s) => parse_rational(s)?,
                Value::Number(n) if n.is_i64() => q(n.as_i64().unwrap()),
                other => return Err(Error::Parse(format!("bad coefficient {other}"))),
            });
        }
        let coeffs: [BigRational; 5] = coeffs.try_into().unwrap();
        Self::new(coeffs, conductor_primes)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.eq
                .coeffs()
                .iter()
                .map(|c| Value::String(rational_to_string(c)))
                .collect(),
        )
    }

    pub fn is_short_form(&self) -> bool {
        self.eq.a1.is_zero() && self.eq.a2.is_zero() && self.eq.a3.is_zero()
    }

    /// `y² = x³ + a2·x² + a4·x + a6`.
    pub fn is_a2_form(&self) -> bool {
        self.eq.a1.is_zero() && self.eq.a3.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.eq.coeffs().iter().all(|c| c.is_integer())
    }

    pub fn contains(&self, p: &PointQ) -> bool {
        self.eq.contains(p)
    }

    pub fn add(&self, p: &PointQ, q: &PointQ) -> Result<PointQ> {
        self.eq.checked_add(p, q)
    }

    pub fn neg(&self, p: &PointQ) -> PointQ {
        self.eq.neg(p)
    }

    pub fn mul(&self, p: &PointQ, n: i64) -> PointQ {
        self.eq.mul(p, &BigInt::from(n))
    }

    /// Product of the conductor primes.
    pub fn conductor_radical(&self) -> BigInt {
        self.conductor_primes.iter().map(|&p| BigInt::from(p)).product()
    }

    /// `p` is good when the model is `p`-integral and `p` divides neither the
    /// numerator nor the denominator of the discriminant.
    pub fn has_good_reduction(&self, p: u64) -> bool {
        self.is_p_integral(p)
            && mod_u64(self.disc.numer(), p) != 0
            && mod_u64(self.disc.denom(), p) != 0
    }

    fn is_p_integral(&self, p: u64) -> bool {
        self.eq.coeffs().iter().all(|c| mod_u64(c.denom(), p) != 0)
    }

    pub fn reduce(&self, p: u64) -> Result<CurveModP> {
        if !self.is_p_integral(p) {
            return Err(Error::BadReduction(p));
        }
        let a = self.eq.coeffs().map(|c| {
            let inv = crate::arith::pow_mod(mod_u64(c.denom(), p), p - 2, p);
            crate::arith::mul_mod(mod_u64(c.numer(), p), inv, p)
        });
        Ok(CurveModP::new(p, a))
    }

    pub fn change_model(&self, ch: &ModelChange) -> CurveQ {
        let eq = ch.apply_curve(&self.eq);
        CurveQ {
            disc: eq.discriminant(),
            eq,
            conductor_primes: self.conductor_primes.clone(),
        }
    }

    /// Completes the square: the returned model is `Y² = X³ + b2·X² + 8b4·X + 16b6`
    /// (or the curve itself when already in that shape).
    pub fn a2_form(&self) -> (CurveQ, ModelChange) {
        if self.is_a2_form() {
            return (self.clone(), ModelChange::identity());
        }
        let ch = ModelChange {
            u: BigRational::new(1.into(), 2.into()),
            r: q(0),
            s: -&self.eq.a1 / q(2),
            t: -&self.eq.a3 / q(2),
        };
        (self.change_model(&ch), ch)
    }

    /// Scales `x, y` by `k², k³` with the least positive integer `k` making every
    /// coefficient integral.
    pub fn integral_model(&self) -> (CurveQ, ModelChange) {
        let mut k = BigInt::one();
        for (i, c) in [1u32, 2, 3, 4, 6].iter().zip(self.eq.coeffs().iter()) {
            let den = c.denom();
            if den.is_one() {
                continue;
            }
            let mut need = BigInt::one();
            while !(num_traits::pow(need.clone() * &k, *i as usize) * c.numer())
                .is_multiple_of(den)
            {
                need += 1;
                if need > *den {
                    need = den.clone();
                    break;
                }
            }
            k *= need;
        }
        let ch = ModelChange::scaling(BigRational::new(1.into(), k));
        (self.change_model(&ch), ch)
    }
}

/// `(x, y0·√d)` on `y² = x³ + a2·x² + a4·x + a6`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadPoint {
    pub x: BigRational,
    pub y0: BigRational,
    pub d: BigInt,
}

impl QuadPoint {
    pub fn satisfies(&self, e: &CurveQ) -> bool {
        if !e.is_a2_form() {
            return false;
        }
        let x = &self.x;
        let rhs = x * x * x + &e.eq.a2 * x * x + &e.eq.a4 * x + &e.eq.a6;
        &self.y0 * &self.y0 * BigRational::from_integer(self.d.clone()) == rhs
    }
}

fn check_twist_input(e: &CurveQ, d: &BigInt) -> Result<()> {
    if !e.is_a2_form() {
        return Err(Error::NotShortForm(
            "twisting needs a1 = a3 = 0".into(),
        ));
    }
    if d.is_zero() {
        return Err(Error::Precondition("twist parameter must be nonzero".into()));
    }
    Ok(())
}

/// `y² = x³ + a2·d·x² + a4·d²·x + a6·d³`; for short forms this is the usual
/// `y² = x³ + a·d²·x + b·d³`.
pub fn twist_curve(e: &CurveQ, d: &BigInt) -> Result<CurveQ> {
    check_twist_input(e, d)?;
    let d = BigRational::from_integer(d.clone());
    let d2 = &d * &d;
    let eq = Weierstrass::from_cubic(&e.eq.a2 * &d, &e.eq.a4 * &d2, &e.eq.a6 * &d2 * &d);
    CurveQ::from_weierstrass(eq, e.conductor_primes.clone())
}

pub fn quadpoint_to_twist(p: &QuadPoint, e: &CurveQ) -> Result<(CurveQ, PointQ)> {
    check_twist_input(e, &p.d)?;
    if !p.satisfies(e) {
        return Err(Error::PointNotOnCurve);
    }
    let twist = twist_curve(e, &p.d)?;
    let d = BigRational::from_integer(p.d.clone());
    let pt = Point::affine(&d * &p.x, &d * &d * &p.y0);
    if !twist.contains(&pt) {
        return Err(Error::Internal("twisted point is off the twist".into()));
    }
    Ok((twist, pt))
}

/// Inverse of [`quadpoint_to_twist`]: `(X, Y)` on `E^d` gives `(X/d, Y/d²·√d)` on `E`.
pub fn quadpoint_from_twist(e: &CurveQ, d: &BigInt, p: &PointQ) -> Result<QuadPoint> {
    check_twist_input(e, d)?;
    let Point::Affine { x, y } = p else {
        return Err(Error::Precondition("point at infinity has no affine image".into()));
    };
    let dq = BigRational::from_integer(d.clone());
    let qp = QuadPoint {
        x: x / &dq,
        y0: y / (&dq * &dq),
        d: d.clone(),
    };
    if !qp.satisfies(e) {
        return Err(Error::PointNotOnCurve);
    }
    Ok(qp)
}
