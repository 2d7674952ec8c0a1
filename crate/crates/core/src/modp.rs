//! Prime-field elements with a runtime modulus.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::arith::{mul_mod, pow_mod};
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    pub v: u64,
    pub p: u64,
}

impl Fp {
    pub fn new(v: i64, p: u64) -> Self {
        Fp {
            v: v.rem_euclid(p as i64) as u64,
            p,
        }
    }

    pub fn from_u64(v: u64, p: u64) -> Self {
        Fp { v: v % p, p }
    }

    pub fn pow(self, e: u64) -> Self {
        Fp {
            v: pow_mod(self.v, e, self.p),
            p: self.p,
        }
    }

    pub fn inv(self) -> Self {
        assert!(self.v != 0, "inverse of zero in F_{}", self.p);
        self.pow(self.p - 2)
    }

    /// Quadratic character: 1, -1, or 0.
    pub fn legendre(self) -> i32 {
        if self.v == 0 {
            return 0;
        }
        if self.p == 2 {
            return 1;
        }
        if self.pow((self.p - 1) / 2).v == 1 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.v, self.p)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        debug_assert_eq!(self.p, o.p);
        let s = self.v + o.v;
        Fp {
            v: if s >= self.p { s - self.p } else { s },
            p: self.p,
        }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        debug_assert_eq!(self.p, o.p);
        Fp {
            v: if self.v >= o.v { self.v - o.v } else { self.v + self.p - o.v },
            p: self.p,
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        debug_assert_eq!(self.p, o.p);
        Fp {
            v: mul_mod(self.v, o.v, self.p),
            p: self.p,
        }
    }
}

impl Div for Fp {
    type Output = Fp;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Fp) -> Fp {
        self * o.inv()
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp {
            v: if self.v == 0 { 0 } else { self.p - self.v },
            p: self.p,
        }
    }
}

impl Scalar for Fp {
    fn is_zero_elem(&self) -> bool {
        self.v == 0
    }
    fn zero_like(&self) -> Self {
        Fp { v: 0, p: self.p }
    }
    fn one_like(&self) -> Self {
        Fp { v: 1 % self.p, p: self.p }
    }
    fn from_int_like(&self, n: i64) -> Self {
        Fp::new(n, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ops() {
        let p = 101;
        let a = Fp::new(-3, p);
        assert_eq!(a.v, 98);
        assert_eq!((a * a.inv()).v, 1);
        assert_eq!((a / a).v, 1);
        assert_eq!((-a + a).v, 0);
        assert_eq!(Fp::new(4, 7).legendre(), 1);
        assert_eq!(Fp::new(3, 7).legendre(), -1);
    }
}
