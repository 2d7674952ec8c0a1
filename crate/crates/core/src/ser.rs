//! Serde helpers: big integers travel as decimal strings.

use num_bigint::BigInt;
use serde::Serializer;

pub fn bigint<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}
