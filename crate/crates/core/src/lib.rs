pub mod abelian;
pub mod arith;
pub mod curve;
pub mod dihedral;
pub mod error;
pub mod ff;
pub mod heegner;
pub mod modp;
pub mod mp;
pub mod quad;
pub mod scalar;
pub(crate) mod ser;
pub mod twist;

pub use curve::{CurveModP, CurveQ, Point, QuadPoint, Weierstrass};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type PointQ = curve::Point<num_rational::BigRational>;
