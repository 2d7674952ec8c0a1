//! Residue fields `A/ℓ` for monic irreducible `ℓ`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::poly::FqPoly;
use super::RatFunc;
use crate::scalar::Scalar;

#[derive(Clone)]
pub struct ResElem {
    pub v: FqPoly,
    pub modulus: Arc<FqPoly>,
}

impl PartialEq for ResElem {
    fn eq(&self, o: &ResElem) -> bool {
        self.v == o.v
    }
}

impl fmt::Debug for ResElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod ({})", self.v, self.modulus)
    }
}

impl ResElem {
    pub fn new(v: &FqPoly, modulus: &Arc<FqPoly>) -> Self {
        ResElem {
            v: v.rem(modulus),
            modulus: modulus.clone(),
        }
    }

    /// Reduction of `r`, or `None` if `ℓ` divides its denominator.
    pub fn reduce(r: &RatFunc, modulus: &Arc<FqPoly>) -> Option<Self> {
        let inv = r.den.invmod(modulus)?;
        Some(Self::new(&r.num.mul_ref(&inv), modulus))
    }

    fn wrap(&self, v: FqPoly) -> Self {
        Self::new(&v, &self.modulus)
    }
}

impl Add for ResElem {
    type Output = ResElem;
    fn add(self, o: ResElem) -> ResElem {
        self.wrap(self.v.add_ref(&o.v))
    }
}

impl Sub for ResElem {
    type Output = ResElem;
    fn sub(self, o: ResElem) -> ResElem {
        self.wrap(self.v.sub_ref(&o.v))
    }
}

impl Mul for ResElem {
    type Output = ResElem;
    fn mul(self, o: ResElem) -> ResElem {
        self.wrap(self.v.mul_ref(&o.v))
    }
}

impl Div for ResElem {
    type Output = ResElem;
    fn div(self, o: ResElem) -> ResElem {
        let inv = o.v.invmod(&self.modulus).expect("division by zero in a residue field");
        self.wrap(self.v.mul_ref(&inv))
    }
}

impl Neg for ResElem {
    type Output = ResElem;
    fn neg(self) -> ResElem {
        let v = self.v.neg_ref();
        ResElem { v, modulus: self.modulus }
    }
}

impl Scalar for ResElem {
    fn is_zero_elem(&self) -> bool {
        self.v.is_zero()
    }

    fn zero_like(&self) -> Self {
        self.wrap(FqPoly::zero(&self.v.field))
    }

    fn one_like(&self) -> Self {
        self.wrap(FqPoly::one(&self.v.field))
    }

    fn from_int_like(&self, n: i64) -> Self {
        let f = &self.v.field;
        self.wrap(FqPoly::constant(f, f.from_int(n)))
    }
}
