//! Field-element abstraction shared by every curve model in the crate.
//!
//! Anything implementing [`num_traits::Num`] (big rationals, `f64`, `f32`,
//! machine ratios) is a [`Scalar`] automatically. Residue fields and
//! function fields carry their modulus at runtime, so they cannot produce a
//! context-free `zero()`; for those the constants are derived from an
//! existing element instead (`zero_like`, `one_like`, `from_int_like`).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{FromPrimitive, Num};

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn is_zero_elem(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_int_like(&self, n: i64) -> Self;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl<T> Scalar for T
where
    T: Num + Clone + Debug + Neg<Output = T> + FromPrimitive,
{
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }

    fn zero_like(&self) -> Self {
        T::zero()
    }

    fn one_like(&self) -> Self {
        T::one()
    }

    fn from_int_like(&self, n: i64) -> Self {
        T::from_i64(n).expect("integer constant representable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn rational_constants() {
        let q = BigRational::new(BigInt::from(3), BigInt::from(4));
        assert!(q.zero_like().is_zero_elem());
        assert_eq!(q.from_int_like(-5), BigRational::from_integer(BigInt::from(-5)));
        assert_eq!(q.square(), BigRational::new(BigInt::from(9), BigInt::from(16)));
    }

    #[test]
    fn float_constants() {
        assert_eq!(2.5f64.from_int_like(7), 7.0);
        assert_eq!(1.5f32.one_like(), 1.0);
    }
}
