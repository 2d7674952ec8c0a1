//! The twist construction over `k = 𝔽_q(T)`, `q` odd.
//!
//! With `A = 𝔽_q[T]`, `E: y² = x³ + ax² + bx + c` over `A` and `M` the product
//! of the monic conductor primes, `f(m) = (1+Mm)³ + aM²(1+Mm)² + bM⁴(1+Mm) + cM⁶`
//! is `≡ 1` modulo every conductor prime. A value `f(m)` that is not a square
//! in `𝔽_q((1/T))` gives an imaginary quadratic extension `k(√f(m))` where all
//! conductor primes split, and `((1+Mm)/M², √f(m)/M³)` is a point of `E` over it.

pub mod gf;
pub mod poly;
pub mod residue;

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curve::{Point, Weierstrass};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use gf::{Fq, Gf};
pub use poly::FqPoly;
pub use residue::ResElem;

/// Element of `𝔽_q(T)` in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    pub num: FqPoly,
    pub den: FqPoly,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl RatFunc {
    pub fn new(num: FqPoly, den: FqPoly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            let one = FqPoly::one(&num.field);
            return RatFunc { num, den: one };
        }
        let g = num.gcd(&den);
        let (num, den) = (num.div_exact(&g), den.div_exact(&g));
        let lc = den.field.inv(den.lc());
        RatFunc {
            num: num.scale(lc),
            den: den.scale(lc),
        }
    }

    pub fn poly(p: FqPoly) -> Self {
        let one = FqPoly::one(&p.field);
        RatFunc { num: p, den: one }
    }

    pub fn field(&self) -> &Arc<Gf> {
        &self.num.field
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, o: RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(self.num.add_ref(&o.num), self.den);
        }
        RatFunc::new(
            self.num.mul_ref(&o.den).add_ref(&o.num.mul_ref(&self.den)),
            self.den.mul_ref(&o.den),
        )
    }
}

impl Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, o: RatFunc) -> RatFunc {
        self + (-o)
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, o: RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul_ref(&o.num), self.den.mul_ref(&o.den))
    }
}

impl Div for RatFunc {
    type Output = RatFunc;
    fn div(self, o: RatFunc) -> RatFunc {
        assert!(!o.num.is_zero(), "division by zero in 𝔽_q(T)");
        RatFunc::new(self.num.mul_ref(&o.den), self.den.mul_ref(&o.num))
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: self.num.neg_ref(),
            den: self.den,
        }
    }
}

impl Scalar for RatFunc {
    fn is_zero_elem(&self) -> bool {
        self.num.is_zero()
    }

    fn zero_like(&self) -> Self {
        RatFunc::poly(FqPoly::zero(self.field()))
    }

    fn one_like(&self) -> Self {
        RatFunc::poly(FqPoly::one(self.field()))
    }

    fn from_int_like(&self, n: i64) -> Self {
        let f = self.field();
        RatFunc::poly(FqPoly::constant(f, f.from_int(n)))
    }
}

/// `y² = x³ + ax² + bx + c` over `𝔽_q[T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveFF {
    pub field: Arc<Gf>,
    pub a: FqPoly,
    pub b: FqPoly,
    pub c: FqPoly,
    /// Monic irreducible, sorted by index order, distinct.
    pub conductor_primes: Vec<FqPoly>,
    pub disc: FqPoly,
}

fn cubic_disc(a: &FqPoly, b: &FqPoly, c: &FqPoly) -> FqPoly {
    let f = &a.field;
    let k = |n: i64| FqPoly::constant(f, f.from_int(n));
    let a2 = a.mul_ref(a);
    let b2 = b.mul_ref(b);
    let terms = a2.mul_ref(&b2)
        - k(4).mul_ref(&b2.mul_ref(b))
        - k(4).mul_ref(&a2.mul_ref(a).mul_ref(c))
        - k(27).mul_ref(&c.mul_ref(c))
        + k(18).mul_ref(&a.mul_ref(b).mul_ref(c));
    k(16).mul_ref(&terms)
}

impl CurveFF {
    pub fn new(a: FqPoly, b: FqPoly, c: FqPoly, conductor_primes: Vec<FqPoly>) -> Result<Self> {
        let field = a.field.clone();
        if *b.field != *field || *c.field != *field {
            return Err(Error::Precondition("coefficients over different fields".into()));
        }
        let disc = cubic_disc(&a, &b, &c);
        if disc.is_zero() {
            return Err(Error::Singular);
        }
        let mut primes = conductor_primes;
        for p in &primes {
            if *p.field != *field || p.lc() != 1 || !p.is_irreducible() {
                return Err(Error::Precondition(format!("conductor prime {p} is not monic irreducible")));
            }
        }
        primes.sort_by_key(FqPoly::order_key);
        let n = primes.len();
        primes.dedup();
        if primes.len() != n {
            return Err(Error::Precondition("conductor primes must be distinct".into()));
        }
        Ok(CurveFF {
            field,
            a,
            b,
            c,
            conductor_primes: primes,
            disc,
        })
    }

    /// Rejects coefficients with nontrivial denominators.
    pub fn from_rational(a: RatFunc, b: RatFunc, c: RatFunc, primes: Vec<FqPoly>) -> Result<Self> {
        for (name, v) in [("a", &a), ("b", &b), ("c", &c)] {
            if !v.is_polynomial() {
                return Err(Error::NonIntegral(format!("{name} = {v}")));
            }
        }
        Self::new(a.num, b.num, c.num, primes)
    }

    /// Curve from `"a"`, `"b"`, `"c"` polynomial strings, either as a JSON
    /// object with those keys or a JSON array of three strings, and a comma
    /// separated prime list. Entries of the form `"num/den"` are parsed so that
    /// non-integral input is reported as such.
    pub fn parse(field: &Arc<Gf>, curve: &str, primes: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(curve).map_err(|e| Error::Parse(format!("curve JSON: {e}")))?;
        let get = |key: &str, idx: usize| -> Result<String> {
            let x = match &v {
                Value::Object(o) => o.get(key),
                Value::Array(a) => a.get(idx),
                _ => None,
            };
            match x {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) => Ok(n.to_string()),
                _ => Err(Error::Parse(format!("curve JSON needs coefficient {key}"))),
            }
        };
        let rat = |s: &str| -> Result<RatFunc> {
            match s.split_once('/') {
                Some((n, d)) => {
                    let strip = |t: &str| t.trim().trim_start_matches('(').trim_end_matches(')').to_string();
                    let den = FqPoly::parse(field, &strip(d))?;
                    if den.is_zero() {
                        return Err(Error::Parse(format!("zero denominator in {s:?}")));
                    }
                    Ok(RatFunc::new(FqPoly::parse(field, &strip(n))?, den))
                }
                None => Ok(RatFunc::poly(FqPoly::parse(field, s)?)),
            }
        };
        let primes = primes
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| FqPoly::parse(field, s))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rational(rat(&get("a", 0)?)?, rat(&get("b", 1)?)?, rat(&get("c", 2)?)?, primes)
    }

    pub fn modulus(&self) -> FqPoly {
        self.conductor_primes
            .iter()
            .fold(FqPoly::one(&self.field), |acc, p| acc.mul_ref(p))
    }

    pub fn weierstrass(&self) -> Weierstrass<RatFunc> {
        let r = |p: &FqPoly| RatFunc::poly(p.clone());
        Weierstrass::from_cubic(r(&self.a), r(&self.b), r(&self.c))
    }

    /// `y² = x³ + adx² + bd²x + cd³`, the model where `(x, y0√d)` becomes
    /// `(dx, d²y0)`.
    pub fn twist(&self, d: &FqPoly) -> Result<CurveFF> {
        if d.is_zero() {
            return Err(Error::Precondition("twist by zero".into()));
        }
        let d2 = d.mul_ref(d);
        CurveFF::new(
            self.a.mul_ref(d),
            self.b.mul_ref(&d2),
            self.c.mul_ref(&d2.mul_ref(d)),
            self.conductor_primes.clone(),
        )
    }

    /// `#E(A/ℓ)` for a place `ℓ` of good reduction, by summing the quadratic
    /// character of the cubic over the residue field.
    pub fn count_points_at(&self, ell: &FqPoly) -> Result<u64> {
        if ell.divides(&self.disc) {
            return Err(Error::Precondition(format!("bad reduction at {ell}")));
        }
        let deg = ell.degree().expect("nonzero place");
        let big_q = (self.field.q as u64).pow(deg as u32);
        let (a, b, c) = (self.a.rem(ell), self.b.rem(ell), self.c.rem(ell));
        let half = (big_q - 1) / 2;
        let total: i64 = (0..big_q)
            .into_par_iter()
            .map(|i| {
                let x = FqPoly::from_index(&self.field, i, deg);
                let v = x.add_ref(&a).mulmod(&x, ell).add_ref(&b).mulmod(&x, ell).add_ref(&c).rem(ell);
                if v.is_zero() {
                    return 1;
                }
                let chi = v.powmod(half, ell);
                if chi.is_one() {
                    2
                } else {
                    0
                }
            })
            .sum();
        Ok(total as u64 + 1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.field.q,
            "a": self.a.to_string(),
            "b": self.b.to_string(),
            "c": self.c.to_string(),
            "conductor_primes": self.conductor_primes.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "disc": self.disc.to_string(),
        })
    }
}

/// `f(x) = Σ coeffs[i]·xⁱ` over `𝔽_q[T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistPolynomialFF {
    pub modulus: FqPoly,
    pub curve: CurveFF,
    pub coeffs: [FqPoly; 4],
}

impl TwistPolynomialFF {
    pub fn eval(&self, m: &FqPoly) -> FqPoly {
        self.coeffs
            .iter()
            .rev()
            .fold(FqPoly::zero(&self.modulus.field), |acc, c| acc.mul_ref(m).add_ref(c))
    }

    /// `f − 1` vanishes modulo every conductor prime coefficientwise, so the
    /// congruence holds for every `m`.
    pub fn congruence_holds(&self) -> bool {
        let one = FqPoly::one(&self.modulus.field);
        self.curve.conductor_primes.iter().all(|p| {
            self.coeffs[0].sub_ref(&one).rem(p).is_zero()
                && self.coeffs[1..].iter().all(|c| c.rem(p).is_zero())
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "M": self.modulus.to_string(),
            "coefficients": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

pub fn build_f_ff(e: &CurveFF) -> Result<TwistPolynomialFF> {
    let m = e.modulus();
    let m2 = m.mul_ref(&m);
    let m4 = m2.mul_ref(&m2);
    let m6 = m4.mul_ref(&m2);
    let f = &e.field;
    let one = FqPoly::one(f);
    let zero = FqPoly::zero(f);
    // u = 1 + Mx as [1, M]; powers expanded by hand
    let k = |n: i64| FqPoly::constant(f, f.from_int(n));
    let u2 = [one.clone(), k(2).mul_ref(&m), m2.clone()];
    let u3 = [one.clone(), k(3).mul_ref(&m), k(3).mul_ref(&m2), m2.mul_ref(&m)];
    let mut coeffs = [zero.clone(), zero.clone(), zero.clone(), zero];
    for (i, v) in u3.iter().enumerate() {
        coeffs[i] = coeffs[i].add_ref(v);
    }
    let am2 = e.a.mul_ref(&m2);
    for (i, v) in u2.iter().enumerate() {
        coeffs[i] = coeffs[i].add_ref(&am2.mul_ref(v));
    }
    let bm4 = e.b.mul_ref(&m4);
    coeffs[0] = coeffs[0].add_ref(&bm4);
    coeffs[1] = coeffs[1].add_ref(&bm4.mul_ref(&m));
    coeffs[0] = coeffs[0].add_ref(&e.c.mul_ref(&m6));
    let t = TwistPolynomialFF {
        modulus: m,
        curve: e.clone(),
        coeffs,
    };
    if !t.congruence_holds() {
        return Err(Error::Internal("f ≢ 1 modulo the conductor primes".into()));
    }
    Ok(t)
}

/// Whether `k(√g)/k` is non-split at `∞`: `g` is a square in `𝔽_q((1/T))`
/// exactly when its degree is even and its leading coefficient is a square.
pub fn is_imaginary_at_infinity(g: &FqPoly) -> Result<bool> {
    let deg = g
        .degree()
        .ok_or_else(|| Error::Precondition("imaginarity test on the zero polynomial".into()))?;
    Ok(deg % 2 == 1 || !g.field.is_square(g.lc()))
}

/// Square class of a nonzero polynomial: monic squarefree part plus whether
/// the leading coefficient is a non-square.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SquareClass {
    pub monic: FqPoly,
    pub nonsquare_lc: bool,
}

impl SquareClass {
    pub fn is_trivial(&self) -> bool {
        self.monic.is_one() && !self.nonsquare_lc
    }
}

/// `g = d·s²` with `d` squarefree, leading coefficient `1` or the fixed
/// non-square generator, and `s` carrying the remaining constant.
pub fn square_class(g: &FqPoly) -> Result<(SquareClass, FqPoly, FqPoly)> {
    if g.is_zero() {
        return Err(Error::Precondition("square class of zero".into()));
    }
    let f = &g.field;
    let (u, s) = g.square_split();
    let lc = u.lc();
    let nonsquare = !f.is_square(lc);
    let unit = if nonsquare { f.gen } else { 1 };
    let r = f.sqrt(f.div(lc, unit)).expect("class representative differs by a square");
    let monic = u.monic();
    let d = monic.scale(unit);
    let s = s.scale(r);
    debug_assert_eq!(d.mul_ref(&s).mul_ref(&s), *g);
    Ok((
        SquareClass {
            monic,
            nonsquare_lc: nonsquare,
        },
        d,
        s,
    ))
}

/// `(x, y0·√d)` over `k(√d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FFQuadPoint {
    pub x: RatFunc,
    pub y0: RatFunc,
    pub d: FqPoly,
}

impl FFQuadPoint {
    pub fn satisfies(&self, e: &CurveFF) -> bool {
        let r = |p: &FqPoly| RatFunc::poly(p.clone());
        let x = self.x.clone();
        let rhs = x.clone() * x.clone() * x.clone() + r(&e.a) * x.clone() * x.clone() + r(&e.b) * x + r(&e.c);
        self.y0.clone() * self.y0.clone() * r(&self.d) == rhs
    }

    /// `(dx, d²y0)` on the twisted model.
    pub fn on_twist(&self) -> Point<RatFunc> {
        let d = RatFunc::poly(self.d.clone());
        Point::affine(d.clone() * self.x.clone(), d.clone() * d * self.y0.clone())
    }

    pub fn to_json(&self) -> Value {
        json!({"x": self.x.to_string(), "y0": self.y0.to_string(), "d": self.d.to_string()})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FFCandidate {
    /// Position of `m` in the enumeration.
    pub index: u64,
    pub m: FqPoly,
    pub value: FqPoly,
    pub d: FqPoly,
    pub s: FqPoly,
    pub class: SquareClass,
    pub point: FFQuadPoint,
}

impl FFCandidate {
    pub fn to_json(&self) -> Value {
        json!({
            "index": self.index,
            "m": self.m.to_string(),
            "value": self.value.to_string(),
            "d": self.d.to_string(),
            "s": self.s.to_string(),
            "class": {"monic": self.class.monic.to_string(), "nonsquare_lc": self.class.nonsquare_lc},
            "point": self.point.to_json(),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ScanStatsFF {
    pub scanned: u64,
    pub zero: u64,
    pub real: u64,
    pub trivial_class: u64,
    pub repeated_class: u64,
    pub shares_factor: u64,
    pub not_split: u64,
}

pub const DEFAULT_FF_SCAN: u64 = 200_000;

pub fn make_point_ff(t: &TwistPolynomialFF, m: &FqPoly) -> Result<FFQuadPoint> {
    let value = t.eval(m);
    let (_, d, s) = square_class(&value)?;
    point_from_parts(t, m, d, s)
}

fn point_from_parts(t: &TwistPolynomialFF, m: &FqPoly, d: FqPoly, s: FqPoly) -> Result<FFQuadPoint> {
    let mm = &t.modulus;
    let m2 = mm.mul_ref(mm);
    let u = FqPoly::one(&mm.field).add_ref(&mm.mul_ref(m));
    let p = FFQuadPoint {
        x: RatFunc::new(u, m2.clone()),
        y0: RatFunc::new(s, m2.mul_ref(mm)),
        d,
    };
    if !p.satisfies(&t.curve) {
        return Err(Error::Internal(format!("point for m = {m} is off the curve")));
    }
    Ok(p)
}

/// Residue of `g` modulo `𝔭` is a nonzero square in `A/𝔭`.
fn is_residue_square(g: &FqPoly, p: &FqPoly) -> bool {
    let r = g.rem(p);
    if r.is_zero() {
        return false;
    }
    let big_q = (p.field.q as u64).pow(p.degree().unwrap() as u32);
    r.powmod((big_q - 1) / 2, p).is_one()
}

pub fn find_candidates_ff(t: &TwistPolynomialFF, count: usize) -> Result<Vec<FFCandidate>> {
    find_candidates_ff_with(t, count, DEFAULT_FF_SCAN).map(|(c, _)| c)
}

/// Scans `m` in index order (degree, then coefficients) and keeps the first
/// `count` admissible values.
pub fn find_candidates_ff_with(
    t: &TwistPolynomialFF,
    count: usize,
    max_scan: u64,
) -> Result<(Vec<FFCandidate>, ScanStatsFF)> {
    if count == 0 {
        return Err(Error::Precondition("count must be at least 1".into()));
    }
    let field = t.modulus.field.clone();
    let bad = t.modulus.mul_ref(&t.curve.disc);
    let mut stats = ScanStatsFF::default();
    let mut seen: HashSet<SquareClass> = HashSet::new();
    let mut out = vec![];
    let block = 256u64;
    let mut start = 0u64;
    while start < max_scan {
        let end = (start + block).min(max_scan);
        type Row = (u64, FqPoly, FqPoly, Option<(SquareClass, FqPoly, FqPoly)>);
        let rows: Vec<Row> = (start..end)
            .into_par_iter()
            .map(|i| {
                let m = FqPoly::from_index(&field, i, 64);
                let v = t.eval(&m);
                let parts = match is_imaginary_at_infinity(&v) {
                    Ok(true) => square_class(&v).ok(),
                    _ => None,
                };
                (i, m, v, parts)
            })
            .collect();
        for (index, m, value, parts) in rows {
            stats.scanned += 1;
            if value.is_zero() {
                stats.zero += 1;
                continue;
            }
            let Some((class, d, s)) = parts else {
                stats.real += 1;
                continue;
            };
            if class.is_trivial() {
                stats.trivial_class += 1;
                continue;
            }
            if seen.contains(&class) {
                stats.repeated_class += 1;
                continue;
            }
            if !class.monic.gcd(&bad).is_one() {
                stats.shares_factor += 1;
                continue;
            }
            let split = t.curve.conductor_primes.iter().all(|p| {
                value.sub_ref(&FqPoly::one(&field)).rem(p).is_zero() && is_residue_square(&value, p)
            });
            if !split {
                stats.not_split += 1;
                continue;
            }
            seen.insert(class.clone());
            let point = point_from_parts(t, &m, d.clone(), s.clone())?;
            out.push(FFCandidate {
                index,
                m,
                value,
                d,
                s,
                class,
                point,
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

/// Good places are taken a whole degree at a time, stopping at the first
/// degree that brings the count to two: higher degrees only raise the
/// `p`-power allowance. Residue fields past this size are not enumerated.
pub const MAX_RESIDUE_FIELD: u64 = 1 << 17;

#[derive(Clone, Debug, PartialEq)]
pub struct TorsionBoundFF {
    /// `(ℓ, #E(A/ℓ))` for the places used.
    pub counts: Vec<(FqPoly, u64)>,
    pub gcd: u64,
    /// Largest power of `p` not exceeding the Weil upper bound at the places used.
    pub p_allowance: u64,
    pub bound: u64,
}

impl TorsionBoundFF {
    pub fn to_json(&self) -> Value {
        json!({
            "counts": self.counts.iter().map(|(l, n)| json!([l.to_string(), n])).collect::<Vec<_>>(),
            "gcd": self.gcd,
            "p_allowance": self.p_allowance,
            "bound": self.bound,
        })
    }
}

/// Weil upper bound `⌊Q + 1 + 2√Q⌋`.
pub fn weil_upper(big_q: u64) -> u64 {
    big_q + 1 + (4 * big_q).isqrt()
}

/// Prime-to-`p` torsion injects into `E(A/ℓ)` at good places; the `p`-part
/// is covered by the allowance.
pub fn torsion_bound_ff(e: &CurveFF) -> Result<TorsionBoundFF> {
    let field = &e.field;
    let q = field.q as u64;
    let mut counts = vec![];
    let mut g = 0u64;
    let mut deg = 1usize;
    while q.pow(deg as u32) <= MAX_RESIDUE_FIELD {
        for ell in FqPoly::monic_irreducibles(field, deg) {
            if ell.divides(&e.disc) {
                continue;
            }
            let n = e.count_points_at(&ell)?;
            g = g.gcd(&n);
            counts.push((ell, n));
            if counts.len() >= 2 && g == 1 {
                break;
            }
        }
        if counts.len() >= 2 {
            break;
        }
        deg += 1;
    }
    if counts.len() < 2 {
        return Err(Error::NoGoodPrimes(MAX_RESIDUE_FIELD));
    }
    let weil = counts
        .iter()
        .map(|(l, _)| weil_upper(q.pow(l.degree().unwrap() as u32)))
        .max()
        .unwrap();
    let p = field.p as u64;
    let mut allowance = 1;
    while allowance * p <= weil {
        allowance *= p;
    }
    Ok(TorsionBoundFF {
        counts,
        gcd: g,
        p_allowance: allowance,
        bound: g * allowance,
    })
}

/// How `B·P ≠ O` was decided. Reduction at a good place is a homomorphism,
/// so a nonzero `B·(P mod ℓ)` already rules out `B·P = O`; otherwise `B·P`
/// is computed in `𝔽_q(T)`.
#[derive(Clone, Debug, PartialEq)]
pub enum MultipleWitness {
    Reduction { place: FqPoly, multiple: Point<ResElem> },
    Global(Point<RatFunc>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NontorsionProofFF {
    pub twist: CurveFF,
    pub bound: TorsionBoundFF,
    pub witness: MultipleWitness,
}

impl NontorsionProofFF {
    pub fn is_nontorsion(&self) -> bool {
        match &self.witness {
            MultipleWitness::Reduction { multiple, .. } => !multiple.is_infinity(),
            MultipleWitness::Global(m) => !m.is_infinity(),
        }
    }

    pub fn to_json(&self) -> Value {
        let witness = match &self.witness {
            MultipleWitness::Reduction { place, multiple } => json!({
                "kind": "reduction",
                "place": place.to_string(),
                "multiple": match multiple {
                    Point::Infinity => Value::Null,
                    Point::Affine { x, y } => json!([x.v.to_string(), y.v.to_string()]),
                },
            }),
            MultipleWitness::Global(m) => json!({
                "kind": "global",
                "multiple": match m {
                    Point::Infinity => Value::Null,
                    Point::Affine { x, y } => json!([x.to_string(), y.to_string()]),
                },
            }),
        };
        json!({
            "twist": self.twist.to_json(),
            "bound": self.bound.to_json(),
            "witness": witness,
            "nontorsion": self.is_nontorsion(),
        })
    }
}

/// Residue fields searched for a reduction witness.
pub const WITNESS_RESIDUE_LIMIT: u64 = 1 << 13;

/// `P mod ℓ` on the reduced model; poles reduce to `O`.
pub fn reduce_point(e: &CurveFF, p: &Point<RatFunc>, ell: &FqPoly) -> (Weierstrass<ResElem>, Point<ResElem>) {
    let m = Arc::new(ell.clone());
    let r = |c: &FqPoly| ResElem::new(c, &m);
    let w = Weierstrass::from_cubic(r(&e.a), r(&e.b), r(&e.c));
    let pt = match p {
        Point::Infinity => Point::Infinity,
        Point::Affine { x, y } => match (ResElem::reduce(x, &m), ResElem::reduce(y, &m)) {
            (Some(x), Some(y)) => Point::affine(x, y),
            _ => Point::Infinity,
        },
    };
    (w, pt)
}

fn reduction_witness(e: &CurveFF, p: &Point<RatFunc>, b: u64) -> Option<(FqPoly, Point<ResElem>)> {
    let q = e.field.q as u64;
    let mut deg = 1usize;
    while q.pow(deg as u32) <= WITNESS_RESIDUE_LIMIT {
        for ell in FqPoly::monic_irreducibles(&e.field, deg) {
            if ell.divides(&e.disc) {
                continue;
            }
            let (w, pt) = reduce_point(e, p, &ell);
            let multiple = w.mul_u64(&pt, b);
            if !multiple.is_infinity() {
                return Some((ell, multiple));
            }
        }
        deg += 1;
    }
    None
}

/// Decides `B·P ≠ O` on a model over `𝔽_q(T)` itself.
pub fn nontorsion_proof_ff_point(e: &CurveFF, p: &Point<RatFunc>) -> Result<NontorsionProofFF> {
    let w = e.weierstrass();
    if !w.contains(p) {
        return Err(Error::PointNotOnCurve);
    }
    let bound = torsion_bound_ff(e)?;
    let witness = match p {
        Point::Infinity => MultipleWitness::Global(Point::Infinity),
        _ => match reduction_witness(e, p, bound.bound) {
            Some((place, multiple)) => MultipleWitness::Reduction { place, multiple },
            None => MultipleWitness::Global(w.mul_u64(p, bound.bound)),
        },
    };
    Ok(NontorsionProofFF {
        twist: e.clone(),
        bound,
        witness,
    })
}

pub fn nontorsion_proof_ff(e: &CurveFF, p: &FFQuadPoint) -> Result<NontorsionProofFF> {
    if !p.satisfies(e) {
        return Err(Error::PointNotOnCurve);
    }
    let twist = e.twist(&p.d)?;
    nontorsion_proof_ff_point(&twist, &p.on_twist())
}

pub fn nontorsion_ff(e: &CurveFF, p: &FFQuadPoint) -> Result<bool> {
    Ok(nontorsion_proof_ff(e, p)?.is_nontorsion())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateFF {
    pub polynomial: TwistPolynomialFF,
    pub candidates: Vec<FFCandidate>,
    pub proofs: Vec<NontorsionProofFF>,
    pub stats: ScanStatsFF,
}

impl CertificateFF {
    /// Every predicate rechecked from the stored data.
    pub fn is_valid(&self) -> bool {
        let e = &self.polynomial.curve;
        let classes: HashSet<&SquareClass> = self.candidates.iter().map(|c| &c.class).collect();
        classes.len() == self.candidates.len()
            && self.polynomial.congruence_holds()
            && self.candidates.iter().zip(&self.proofs).all(|(c, pr)| {
                is_imaginary_at_infinity(&c.value).unwrap_or(false)
                    && c.point.satisfies(e)
                    && e.conductor_primes.iter().all(|p| is_residue_square(&c.value, p))
                    && pr.is_nontorsion()
            })
            && self.proofs.len() == self.candidates.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "curve": self.polynomial.curve.to_json(),
            "polynomial": self.polynomial.to_json(),
            "candidates": self.candidates.iter().zip(&self.proofs).map(|(c, p)| {
                let mut v = c.to_json();
                v["nontorsion"] = p.to_json();
                v
            }).collect::<Vec<_>>(),
            "stats": self.stats,
            "valid": self.is_valid(),
        })
    }
}

/// Full pipeline: polynomial, scan, nontorsion per candidate.
pub fn certify_ff(e: &CurveFF, count: usize, max_scan: u64) -> Result<CertificateFF> {
    let polynomial = build_f_ff(e)?;
    let (candidates, stats) = find_candidates_ff_with(&polynomial, count, max_scan)?;
    let proofs = candidates
        .iter()
        .map(|c| nontorsion_proof_ff(e, &c.point))
        .collect::<Result<Vec<_>>>()?;
    Ok(CertificateFF {
        polynomial,
        candidates,
        proofs,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Arc<Gf> {
        Arc::new(Gf::new(3).unwrap())
    }

    fn toy(k: &Arc<Gf>, primes: &str) -> CurveFF {
        CurveFF::parse(k, r#"{"a":"T","b":"1","c":"T"}"#, primes).unwrap()
    }

    #[test]
    fn imaginarity_examples() {
        let k = f3();
        let p = |s| FqPoly::parse(&k, s).unwrap();
        assert!(is_imaginary_at_infinity(&p("T")).unwrap());
        assert!(!is_imaginary_at_infinity(&p("T^2+1")).unwrap());
        assert!(is_imaginary_at_infinity(&p("2*T^2+1")).unwrap());
        assert!(is_imaginary_at_infinity(&FqPoly::zero(&k)).is_err());
    }

    #[test]
    fn degenerate_polynomial() {
        let k = f3();
        let t = FqPoly::t(&k);
        let z = FqPoly::zero(&k);
        // a = b = c = 0 is singular as a curve, so build the polynomial by hand
        let e = CurveFF {
            field: k.clone(),
            a: z.clone(),
            b: z.clone(),
            c: z.clone(),
            conductor_primes: vec![t.clone()],
            disc: z.clone(),
        };
        let f = build_f_ff(&e).unwrap();
        assert!(f.eval(&z).is_one());
        let u = FqPoly::one(&k).add_ref(&t.mul_ref(&FqPoly::parse(&k, "T+2").unwrap()));
        assert_eq!(f.eval(&FqPoly::parse(&k, "T+2").unwrap()), u.pow(3));
    }

    #[test]
    fn congruence_at_t2_plus_1() {
        let k = f3();
        let e = toy(&k, "T^2+1");
        let f = build_f_ff(&e).unwrap();
        let p = FqPoly::parse(&k, "T^2+1").unwrap();
        for i in 0..200 {
            let m = FqPoly::from_index(&k, i * 7 + 3, 10);
            assert!(f.eval(&m).rem(&p).is_one());
        }
    }

    #[test]
    fn rejects_bad_input() {
        let k = f3();
        assert!(matches!(
            CurveFF::parse(&k, r#"["1/T","1","T"]"#, "T"),
            Err(Error::NonIntegral(_))
        ));
        assert!(matches!(CurveFF::parse(&k, r#"["0","0","0"]"#, "T"), Err(Error::Singular)));
        assert!(CurveFF::parse(&k, r#"["T","1","T"]"#, "T^2+2").is_err());
        assert!(CurveFF::parse(&k, r#"["T","1","T"]"#, "T,T").is_err());
    }

    #[test]
    fn ratfunc_field_ops() {
        let k = f3();
        let r = |n: &str, d: &str| RatFunc::new(FqPoly::parse(&k, n).unwrap(), FqPoly::parse(&k, d).unwrap());
        let x = r("T+1", "T^2");
        let y = r("2", "T+2");
        assert_eq!((x.clone() + y.clone()) - y.clone(), x);
        assert_eq!((x.clone() * y.clone()) / y.clone(), x);
        assert_eq!(r("T^2+2*T+1", "2*T+2"), r("2*T+2", "1"));
    }

    #[test]
    fn square_class_normalization() {
        let k = f3();
        let g = FqPoly::parse(&k, "2*T^3+T").unwrap();
        let (cls, d, s) = square_class(&g).unwrap();
        assert!(cls.nonsquare_lc);
        assert_eq!(d.mul_ref(&s).mul_ref(&s), g);
        let h = FqPoly::parse(&k, "T^2+T+2").unwrap();
        let (cls2, _, _) = square_class(&g.mul_ref(&h).mul_ref(&h).scale(2)).unwrap();
        // scaling by 2 flips the class bit
        assert_eq!(cls2.monic, cls.monic);
        assert!(!cls2.nonsquare_lc);
    }

    #[test]
    fn weil_bound_at_small_places() {
        let k = f3();
        let e = toy(&k, "T");
        for deg in 1..=3 {
            for ell in FqPoly::monic_irreducibles(&k, deg) {
                let Ok(n) = e.count_points_at(&ell) else { continue };
                let big_q = 3u64.pow(deg as u32) as i64;
                assert!((n as i64 - big_q - 1).pow(2) <= 4 * big_q, "{ell}: {n}");
            }
        }
    }

    #[test]
    fn two_torsion_and_identity_are_torsion() {
        let k = f3();
        // y² = x(x² + Tx + 1): (0, 0) has order two
        let e = CurveFF::parse(&k, r#"["T","1","0"]"#, "T").unwrap();
        let z = RatFunc::poly(FqPoly::zero(&k));
        let p = FFQuadPoint {
            x: z.clone(),
            y0: z,
            d: FqPoly::one(&k),
        };
        assert!(!nontorsion_ff(&e, &p).unwrap());
        assert!(!nontorsion_proof_ff_point(&e, &Point::Infinity).unwrap().is_nontorsion());
    }
}
