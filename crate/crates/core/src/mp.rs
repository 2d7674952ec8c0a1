//! Real and complex floating point at a working precision.
//!
//! [`Real`] is implemented for `f64` (for quick checks) and for [`Mp`], an
//! arbitrary-precision binary float whose precision travels with the value.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Working precision in bits.
    fn prec(&self) -> usize;
    /// A constant at the precision of `self`.
    fn lift(&self, v: f64) -> Self;
    fn lift_int(&self, v: &BigInt) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan(&self) -> Self;
    fn pi(&self) -> Self;
    fn abs(&self) -> Self;
    fn floor(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// The exact binary value.
    fn to_rational(&self) -> BigRational;

    fn is_zero(&self) -> bool {
        self.to_f64() == 0.0
    }

    fn lift_rational(&self, r: &BigRational) -> Self {
        self.lift_int(r.numer()) / self.lift_int(r.denom())
    }

    fn round(&self) -> Self {
        (self.clone() + self.lift(0.5)).floor()
    }

    /// `2^-prec`.
    fn epsilon(&self) -> Self {
        self.lift(2f64.powi(-(self.prec().min(1000) as i32)))
    }

    fn max(self, o: Self) -> Self {
        if self >= o {
            self
        } else {
            o
        }
    }

    /// Angle of `(x, y)` in `(-π, π]`.
    fn atan2(&self, x: &Self) -> Self {
        let y = self;
        let zero = self.lift(0.0);
        if x.is_zero() && y.is_zero() {
            return zero;
        }
        if x.abs() >= y.abs() {
            let a = (y.clone() / x.clone()).atan();
            if *x > zero {
                a
            } else if *y >= zero {
                a + self.pi()
            } else {
                a - self.pi()
            }
        } else {
            let half_pi = self.pi() / self.lift(2.0);
            let a = (x.clone() / y.clone()).atan();
            if *y > zero {
                half_pi - a
            } else {
                -half_pi - a
            }
        }
    }
}

impl Real for f64 {
    fn prec(&self) -> usize {
        53
    }
    fn lift(&self, v: f64) -> Self {
        v
    }
    fn lift_int(&self, v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }
    fn lift_rational(&self, r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn pi(&self) -> Self {
        std::f64::consts::PI
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite float")
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
}

/// Binary float with `p` bits of mantissa.
#[derive(Clone)]
pub struct Mp {
    v: BigFloat,
    p: usize,
}

impl Mp {
    pub fn new(v: f64, p: usize) -> Self {
        Mp {
            v: BigFloat::from_f64(v, p),
            p,
        }
    }

    pub fn from_int(n: &BigInt, p: usize) -> Self {
        Mp::new(0.0, p).lift_int(n)
    }

    pub fn from_rational(r: &BigRational, p: usize) -> Self {
        Mp::new(0.0, p).lift_rational(r)
    }

    pub fn with_prec(&self, p: usize) -> Self {
        let mut v = self.v.clone();
        v.set_precision(p, RM).expect("valid precision");
        Mp { v, p }
    }

    fn wrap(&self, v: BigFloat) -> Self {
        Mp { v, p: self.p }
    }

    pub fn to_decimal(&self) -> String {
        with_consts(|cc| self.v.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal())
    }
}

impl PartialEq for Mp {
    fn eq(&self, o: &Mp) -> bool {
        self.v.cmp(&o.v) == Some(0)
    }
}

impl PartialOrd for Mp {
    fn partial_cmp(&self, o: &Mp) -> Option<Ordering> {
        self.v.cmp(&o.v).map(|c| c.cmp(&0))
    }
}

macro_rules! mp_binop {
    ($tr:ident, $f:ident) => {
        impl $tr for Mp {
            type Output = Mp;
            fn $f(self, o: Mp) -> Mp {
                let p = self.p.max(o.p);
                Mp {
                    v: self.v.$f(&o.v, p, RM),
                    p,
                }
            }
        }
    };
}

mp_binop!(Add, add);
mp_binop!(Sub, sub);
mp_binop!(Mul, mul);
mp_binop!(Div, div);

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp {
            v: self.v.neg(),
            p: self.p,
        }
    }
}

impl Real for Mp {
    fn prec(&self) -> usize {
        self.p
    }
    fn lift(&self, v: f64) -> Self {
        Mp::new(v, self.p)
    }
    fn lift_int(&self, n: &BigInt) -> Self {
        // base-2^64 digits assembled by shifts
        let mut acc = BigFloat::from_u64(0, self.p);
        let digits: Vec<u64> = n.magnitude().iter_u64_digits().collect();
        let base = BigFloat::from_f64(2f64.powi(64), self.p);
        for &d in digits.iter().rev() {
            acc = acc
                .mul(&base, self.p, RM)
                .add(&BigFloat::from_u64(d, self.p), self.p, RM);
        }
        if n.is_negative() {
            acc = acc.neg();
        }
        self.wrap(acc)
    }
    fn sqrt(&self) -> Self {
        self.wrap(self.v.sqrt(self.p, RM))
    }
    fn ln(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.ln(self.p, RM, cc)))
    }
    fn exp(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.exp(self.p, RM, cc)))
    }
    fn sin(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.sin(self.p, RM, cc)))
    }
    fn cos(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.cos(self.p, RM, cc)))
    }
    fn atan(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.atan(self.p, RM, cc)))
    }
    fn pi(&self) -> Self {
        self.wrap(with_consts(|cc| cc.pi(self.p, RM)))
    }
    fn abs(&self) -> Self {
        self.wrap(self.v.abs())
    }
    fn floor(&self) -> Self {
        self.wrap(self.v.floor())
    }
    fn is_zero(&self) -> bool {
        self.v.is_zero()
    }
    fn to_f64(&self) -> f64 {
        let Some((m, _, s, e, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        if self.v.is_zero() {
            return 0.0;
        }
        let top = *m.last().expect("nonempty mantissa") as f64;
        let v = top * 2f64.powi(e - 64);
        if s == Sign::Neg {
            -v
        } else {
            v
        }
    }
    fn to_rational(&self) -> BigRational {
        if self.v.is_zero() {
            return BigRational::zero();
        }
        let (m, _, s, e, _) = self.v.as_raw_parts().expect("finite value");
        let mut mant = BigUint::zero();
        for &w in m.iter().rev() {
            mant = (mant << 64) + BigUint::from(w);
        }
        // value = 0.m × 2^e with the mantissa occupying 64·len bits
        let shift = e as i64 - 64 * m.len() as i64;
        let mut n = BigInt::from(mant);
        if s == Sign::Neg {
            n = -n;
        }
        if shift >= 0 {
            BigRational::from_integer(n << shift as usize)
        } else {
            BigRational::new(n, BigInt::one() << (-shift) as usize)
        }
    }
}

/// `(mantissa, exponent)` with value `mantissa·2^exponent`, the mantissa odd
/// or zero.
pub fn float_parts<R: Real>(x: &R) -> (BigInt, i64) {
    let r = x.to_rational();
    if r.is_zero() {
        return (BigInt::zero(), 0);
    }
    let mut num = r.numer().clone();
    let den = r.denom();
    debug_assert!((BigInt::one() << (den.bits() - 1)) == *den);
    let mut e = -(den.bits() as i64 - 1);
    while (&num & BigInt::one()).is_zero() {
        num >>= 1;
        e += 1;
    }
    (num, e)
}

/// `["±0x<mantissa>", exponent, precision-bits]`.
pub fn float_triple<R: Real>(x: &R) -> serde_json::Value {
    let (m, e) = float_parts(x);
    let sign = if m.is_negative() { "-" } else { "" };
    serde_json::json!([format!("{sign}0x{:x}", m.magnitude()), e, x.prec()])
}

/// Complex number over a [`Real`].
#[derive(Clone, Debug, PartialEq)]
pub struct Cx<R> {
    pub re: R,
    pub im: R,
}

impl<R: Real> Cx<R> {
    pub fn new(re: R, im: R) -> Self {
        Cx { re, im }
    }

    pub fn real(re: R) -> Self {
        let im = re.lift(0.0);
        Cx { re, im }
    }

    pub fn zero_like(r: &R) -> Self {
        Cx::real(r.lift(0.0))
    }

    pub fn one_like(r: &R) -> Self {
        Cx::real(r.lift(1.0))
    }

    pub fn i_like(r: &R) -> Self {
        Cx::new(r.lift(0.0), r.lift(1.0))
    }

    pub fn conj(&self) -> Self {
        Cx::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> R {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn abs(&self) -> R {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: &R) -> Self {
        Cx::new(self.re.clone() * k.clone(), self.im.clone() * k.clone())
    }

    pub fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        Cx::new(self.re.clone() / n.clone(), -self.im.clone() / n)
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        Cx::new(m.clone() * self.im.cos(), m * self.im.sin())
    }

    /// `exp(2πi·self)`.
    pub fn exp_2pi_i(&self) -> Self {
        let two_pi = self.re.pi() * self.re.lift(2.0);
        Cx::new(-self.im.clone() * two_pi.clone(), self.re.clone() * two_pi).exp()
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let r = self.abs();
        let zero = r.lift(0.0);
        if r.is_zero() {
            return Cx::zero_like(&r);
        }
        let half = r.lift(0.5);
        let a = ((r.clone() + self.re.clone()) * half.clone()).max(zero.clone()).sqrt();
        let b = ((r - self.re.clone()) * half).max(zero.clone()).sqrt();
        if self.im < zero {
            Cx::new(a, -b)
        } else {
            Cx::new(a, b)
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl<R: Real> Add for Cx<R> {
    type Output = Cx<R>;
    fn add(self, o: Cx<R>) -> Cx<R> {
        Cx::new(self.re + o.re, self.im + o.im)
    }
}

impl<R: Real> Sub for Cx<R> {
    type Output = Cx<R>;
    fn sub(self, o: Cx<R>) -> Cx<R> {
        Cx::new(self.re - o.re, self.im - o.im)
    }
}

impl<R: Real> Mul for Cx<R> {
    type Output = Cx<R>;
    fn mul(self, o: Cx<R>) -> Cx<R> {
        let re = self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone();
        let im = self.re * o.im + self.im * o.re;
        Cx::new(re, im)
    }
}

impl<R: Real> Div for Cx<R> {
    type Output = Cx<R>;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Cx<R>) -> Cx<R> {
        self * o.inv()
    }
}

impl<R: Real> Neg for Cx<R> {
    type Output = Cx<R>;
    fn neg(self) -> Cx<R> {
        Cx::new(-self.re, -self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_conversions() {
        let x = Mp::new(3.0, 128);
        assert_eq!(x.to_rational(), BigRational::from_integer(3.into()));
        let y = Mp::new(-0.375, 128);
        assert_eq!(y.to_rational(), BigRational::new((-3).into(), 8.into()));
        assert_eq!(y.to_f64(), -0.375);
        assert_eq!(float_parts(&y), (BigInt::from(-3), -3));
        assert_eq!(float_triple(&y), serde_json::json!(["-0x3", -3, 128]));
        assert_eq!(float_triple(&10.0f64), serde_json::json!(["0x5", 1, 53]));
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        assert_eq!(Mp::from_int(&big, 192).to_rational().to_integer(), big);
    }

    #[test]
    fn transcendental_agree_with_f64() {
        let x = Mp::new(0.7, 128);
        for (a, b) in [
            (x.sqrt().to_f64(), 0.7f64.sqrt()),
            (x.ln().to_f64(), 0.7f64.ln()),
            (x.exp().to_f64(), 0.7f64.exp()),
            (x.sin().to_f64(), 0.7f64.sin()),
            (x.atan().to_f64(), 0.7f64.atan()),
            (x.pi().to_f64(), std::f64::consts::PI),
            (Real::atan2(&Mp::new(-1.0, 128), &Mp::new(-2.0, 128)).to_f64(), (-1f64).atan2(-2.0)),
        ] {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn pi_to_many_digits() {
        let pi = Mp::new(0.0, 256).pi();
        assert!(pi.to_decimal().starts_with("3.14159265358979323846264338327950288419716939937510"));
    }

    #[test]
    fn complex_sqrt_and_exp() {
        let z = Cx::new(Mp::new(-3.0, 128), Mp::new(4.0, 128));
        let r = z.sqrt();
        assert_eq!(r.to_f64(), (1.0, 2.0));
        let e = Cx::new(Mp::new(0.0, 128), Mp::new(0.0, 128).pi()).exp();
        assert!((e.re.to_f64() + 1.0).abs() < 1e-30 && e.im.to_f64().abs() < 1e-30);
    }
}
