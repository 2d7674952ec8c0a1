use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("singular curve: discriminant is zero")]
    Singular,
    #[error("curve is not in the required form: {0}")]
    NotShortForm(String),
    #[error("bad reduction at p = {0}")]
    BadReduction(u64),
    #[error("not enough primes of good reduction below {0}")]
    NoGoodPrimes(u64),
    #[error("precision target unreachable: {0}")]
    PrecisionUnreachable(String),
    #[error("invalid discriminant {0}: must be negative and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),
    #[error("discriminant {0} is not fundamental")]
    NotFundamental(i64),
    #[error("forms have different discriminants ({0} and {1})")]
    MismatchedDiscriminants(i64, i64),
    #[error("form ({0}, {1}, {2}) is not primitive positive definite")]
    InvalidForm(i64, i64, i64),
    #[error("p = {0} divides the discriminant {1}")]
    PrimeDividesDiscriminant(u64, i64),
    #[error("non-integral coefficients: {0}")]
    NonIntegral(String),
    #[error("scan budget exhausted after {scanned} values with {found} of {wanted} candidates")]
    BudgetExhausted {
        scanned: u64,
        found: usize,
        wanted: usize,
    },
    #[error("duplicate square class {0}")]
    DuplicateSquareClass(String),
    #[error("Heegner hypothesis violated: {0}")]
    HeegnerHypothesis(String),
    #[error("no square root of {0} modulo {1}")]
    NoSquareRoot(String, String),
    #[error("argument is a lattice point (pole of the Weierstrass function)")]
    Pole,
    #[error("rational recognition failed: {0}")]
    RecognitionFailed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
