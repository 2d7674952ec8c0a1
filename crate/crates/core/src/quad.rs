//! Imaginary quadratic orders and their class groups via binary quadratic forms.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use crate::abelian::{element_order, group_structure};
use crate::arith::{fundamental_part, is_fundamental, is_prime_u64, kronecker, kronecker_i64};
use crate::curve::CurveQ;
use crate::error::{Error, Result};

fn check_disc(d: i64) -> Result<()> {
    if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::InvalidDiscriminant(d));
    }
    Ok(())
}

/// The order of conductor `f` in the ring of integers of discriminant `d_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct QuadOrder {
    pub d_k: i64,
    pub f: i64,
    pub d: i64,
}

impl QuadOrder {
    pub fn new(d_k: i64, f: i64) -> Result<Self> {
        check_disc(d_k)?;
        if !is_fundamental(d_k) {
            return Err(Error::NotFundamental(d_k));
        }
        if f < 1 {
            return Err(Error::Precondition(format!("conductor {f} must be positive")));
        }
        let d = f
            .checked_mul(f)
            .and_then(|f2| f2.checked_mul(d_k))
            .ok_or_else(|| Error::Precondition("discriminant overflows i64".into()))?;
        Ok(QuadOrder { d_k, f, d })
    }

    pub fn from_discriminant(d: i64) -> Result<Self> {
        check_disc(d)?;
        let (d_k, f) = fundamental_part(d)?;
        Self::new(d_k, f)
    }

    /// `[O_K^× : O^×]`.
    pub fn unit_index(&self) -> u64 {
        match (self.d_k, self.f) {
            (_, 1) => 1,
            (-4, _) => 2,
            (-3, _) => 3,
            _ => 1,
        }
    }
}

/// Primitive positive definite form `ax² + bxy + cy²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QForm {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let f = QForm { a, b, c };
        let d = (b as i128) * (b as i128) - 4 * (a as i128) * (c as i128);
        if a <= 0 || d >= 0 || a.gcd(&b).gcd(&c) != 1 {
            return Err(Error::InvalidForm(a, b, c));
        }
        Ok(f)
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn principal(d: i64) -> Result<Self> {
        check_disc(d)?;
        let b = d.rem_euclid(2);
        Ok(QForm {
            a: 1,
            b,
            c: (b * b - d) / 4,
        })
    }

    pub fn inverse(&self) -> Self {
        reduce(self.a as i128, -(self.b as i128), self.c as i128)
    }

    pub fn reduced(&self) -> Self {
        reduce(self.a as i128, self.b as i128, self.c as i128)
    }

    /// Values at `(1, 0)`, `(0, 1)` and `(1, 1)` cover every class, so one of
    /// these equivalent forms has leading coefficient prime to `n`.
    fn with_a_prime_to(&self, n: i64) -> (i128, i128, i128) {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let n = n as i128;
        if a.gcd(&n) == 1 {
            (a, b, c)
        } else if c.gcd(&n) == 1 {
            (c, -b, a)
        } else {
            // (a, b + 2a, a + b + c) then swap
            (a + b + c, -(b + 2 * a), a)
        }
    }
}

fn reduce(mut a: i128, mut b: i128, mut c: i128) -> QForm {
    let d = b * b - 4 * a * c;
    loop {
        // bring b into (-a, a]
        if b > a || b <= -a {
            let two_a = 2 * a;
            let mut k = Integer::div_floor(&(a - b), &two_a);
            if b + two_a * k <= -a {
                k += 1;
            }
            let nb = b + two_a * k;
            c = (nb * nb - d) / (4 * a);
            b = nb;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        break;
    }
    if a == c && b < 0 {
        b = -b;
    }
    QForm {
        a: a as i64,
        b: b as i64,
        c: c as i64,
    }
}

/// Extended gcd: `(g, x, y)` with `ax + by = g ≥ 0`.
fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Gauss–Dirichlet composition followed by reduction.
pub fn compose(f: &QForm, g: &QForm) -> Result<QForm> {
    let d = f.disc();
    if g.disc() != d {
        return Err(Error::MismatchedDiscriminants(d, g.disc()));
    }
    let (mut f1, mut f2) = (*f, *g);
    if f1.a > f2.a {
        std::mem::swap(&mut f1, &mut f2);
    }
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (dd, y1) = if a2 % a1 == 0 {
        (a1, 0)
    } else {
        let (g0, u, _) = xgcd(a2, a1);
        (g0, u)
    };
    let (d1, x2, y2) = if s % dd == 0 {
        (dd, 0, -1)
    } else {
        let (g1, u, v) = xgcd(s, dd);
        (g1, u, -v)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let c3 = (b3 * b3 - d as i128) / (4 * a3);
    Ok(reduce(a3, b3, c3))
}

pub fn power(f: &QForm, mut k: u64) -> QForm {
    let mut acc = QForm::principal(f.disc()).expect("valid discriminant");
    let mut base = *f;
    while k > 0 {
        if k & 1 == 1 {
            acc = compose(&acc, &base).expect("same discriminant");
        }
        base = compose(&base, &base).expect("same discriminant");
        k >>= 1;
    }
    acc
}

/// All primitive reduced forms of discriminant `d`, sorted.
pub fn enumerate_reduced(d: i64) -> Result<Vec<QForm>> {
    check_disc(d)?;
    let mut out = vec![];
    let mut a = 1i64;
    while 3 * a * a <= -d {
        let mut b = -a + 1;
        while b <= a {
            if (b - d).rem_euclid(2) == 0 {
                let num = b * b - d;
                if num % (4 * a) == 0 {
                    let c = num / (4 * a);
                    let f = QForm { a, b, c };
                    if c >= a && f.is_reduced() && a.gcd(&b).gcd(&c) == 1 {
                        out.push(f);
                    }
                }
            }
            b += 1;
        }
        a += 1;
    }
    out.sort();
    Ok(out)
}

pub fn class_number(d: i64) -> Result<u64> {
    Ok(enumerate_reduced(d)?.len() as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassGroup {
    pub order: QuadOrder,
    pub reps: Vec<QForm>,
    /// Invariant factors `d_1 | d_2 | …`; empty for the trivial group.
    pub structure: Vec<u64>,
}

impl ClassGroup {
    pub fn h(&self) -> u64 {
        self.reps.len() as u64
    }

    pub fn identity(&self) -> QForm {
        QForm::principal(self.order.d).expect("valid order")
    }

    pub fn compose(&self, f: &QForm, g: &QForm) -> QForm {
        compose(f, g).expect("forms of one discriminant")
    }

    pub fn element_order(&self, f: &QForm) -> u64 {
        element_order(f, &self.identity(), |x, y| self.compose(x, y))
    }

    /// `{"D", "h", "structure", "forms"}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "D": self.order.d,
            "h": self.h(),
            "structure": self.structure,
            "forms": self.reps.iter().map(|f| [f.a, f.b, f.c]).collect::<Vec<_>>(),
        })
    }
}

pub fn class_group(order: &QuadOrder) -> Result<ClassGroup> {
    let reps = enumerate_reduced(order.d)?;
    let id = QForm::principal(order.d)?;
    let structure = group_structure(&reps, id, |x, y| compose(x, y).expect("same discriminant"));
    Ok(ClassGroup {
        order: *order,
        reps,
        structure,
    })
}

fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = vec![];
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `h(O_f) = f·h_K·∏_{p|f}(1 − (D_K|p)/p) / [O_K^× : O_f^×]`.
pub fn order_class_number(d_k: i64, f: i64) -> Result<u64> {
    let order = QuadOrder::new(d_k, f)?;
    let mut h = class_number(d_k)? as i128;
    for (p, e) in prime_factors(f as u64) {
        let chi = kronecker_i64(d_k, p) as i128;
        h *= (p as i128).pow(e - 1) * (p as i128 - chi);
    }
    let w = order.unit_index() as i128;
    debug_assert_eq!(h % w, 0);
    Ok((h / w) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

pub fn splitting(d: i64, p: u64) -> Result<Splitting> {
    if !is_prime_u64(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    Ok(match kronecker_i64(d, p) {
        1 => Splitting::Split,
        -1 => Splitting::Inert,
        _ => Splitting::Ramified,
    })
}

/// Discriminant of `ℚ(√d)` for squarefree `d`.
pub fn field_discriminant(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeSplitting {
    pub p: u64,
    pub splitting: Splitting,
    /// `(D|p)`.
    pub epsilon: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeegnerReport {
    #[serde(serialize_with = "crate::ser::bigint")]
    pub disc: BigInt,
    pub strong: bool,
    pub weak: bool,
    pub coprime: bool,
    pub primes: Vec<PrimeSplitting>,
}

/// Heegner conditions for `ℚ(√d)` and the conductor primes of `E`. The level is
/// taken to be the product of the conductor primes, so `ε(N) = ∏ (D|p)`.
pub fn heegner_hypothesis(e: &CurveQ, d: i64) -> Result<HeegnerReport> {
    if d >= 0 || !crate::arith::is_squarefree_i64(d) {
        return Err(Error::Precondition(format!("{d} must be a negative squarefree integer")));
    }
    heegner_hypothesis_disc(&e.conductor_primes, &BigInt::from(field_discriminant(d)))
}

/// As [`heegner_hypothesis`], for a fundamental discriminant `disc`.
pub fn heegner_hypothesis_disc(conductor_primes: &[u64], disc: &BigInt) -> Result<HeegnerReport> {
    let mut primes = vec![];
    for &p in conductor_primes {
        let epsilon = kronecker(disc, p);
        let splitting = match epsilon {
            1 => Splitting::Split,
            -1 => Splitting::Inert,
            _ => Splitting::Ramified,
        };
        primes.push(PrimeSplitting { p, splitting, epsilon });
    }
    let coprime = primes.iter().all(|r| r.splitting != Splitting::Ramified);
    let strong = coprime && primes.iter().all(|r| r.splitting == Splitting::Split);
    let weak = coprime && primes.iter().map(|r| r.epsilon).product::<i32>() == 1;
    Ok(HeegnerReport {
        disc: disc.clone(),
        strong,
        weak,
        coprime,
        primes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerKernel {
    pub d_k: i64,
    pub p: u64,
    pub n: u32,
    pub m: u32,
    pub order: u64,
    pub structure: Vec<u64>,
    /// Every kernel element has `p`-power order.
    pub is_p_group: bool,
}

fn pow_i64(p: u64, e: u32) -> Result<i64> {
    (p as i64)
        .checked_pow(e)
        .ok_or_else(|| Error::Precondition("conductor overflows i64".into()))
}

/// Class of `f` (discriminant `p^{2n}D_K`) in `Pic(O_{p^m})`.
pub fn tower_map(f: &QForm, d_k: i64, p: u64, n: u32, m: u32) -> Result<QForm> {
    let dm = QuadOrder::new(d_k, pow_i64(p, m)?)?.d as i128;
    let scale = pow_i64(p, n - m)? as i128;
    // the scale is odd, so it is invertible modulo 2a once p ∤ a
    let (a, b, _) = f.with_a_prime_to(p as i64);
    let two_a = 2 * a;
    let inv = xgcd(scale.rem_euclid(two_a), two_a).1;
    let bm = (inv * b).rem_euclid(two_a);
    debug_assert_eq!((bm * bm - dm).rem_euclid(4 * a), 0);
    let cm = (bm * bm - dm) / (4 * a);
    Ok(reduce(a, bm, cm))
}

/// `ker(Pic(O_{pⁿ}) → Pic(O_{pᵐ}))`.
pub fn tower_kernel(d_k: i64, p: u64, n: u32, m: u32) -> Result<TowerKernel> {
    if m > n {
        return Err(Error::Precondition(format!("need n ≥ m, got n = {n}, m = {m}")));
    }
    if p == 2 || !is_prime_u64(p) {
        return Err(Error::Precondition(format!("{p} must be an odd prime")));
    }
    if d_k.rem_euclid(p as i64) == 0 {
        return Err(Error::PrimeDividesDiscriminant(p, d_k));
    }
    let order_n = QuadOrder::new(d_k, pow_i64(p, n)?)?;
    let id_m = QForm::principal(QuadOrder::new(d_k, pow_i64(p, m)?)?.d)?;
    let id_n = QForm::principal(order_n.d)?;
    let reps = enumerate_reduced(order_n.d)?;
    let mut kernel = vec![];
    for f in &reps {
        if tower_map(f, d_k, p, n, m)? == id_m {
            kernel.push(*f);
        }
    }
    let op = |x: &QForm, y: &QForm| compose(x, y).expect("same discriminant");
    let is_p_group = kernel.iter().all(|f| {
        let mut o = element_order(f, &id_n, op);
        while o % p == 0 {
            o /= p;
        }
        o == 1
    });
    let structure = group_structure(&kernel, id_n, op);
    Ok(TowerKernel {
        d_k,
        p,
        n,
        m,
        order: kernel.len() as u64,
        structure,
        is_p_group,
    })
}

/// Closure, identity, inverses and associativity of composition on `reps`.
pub fn check_group_axioms(reps: &[QForm]) -> bool {
    let Some(first) = reps.first() else {
        return false;
    };
    let id = match QForm::principal(first.disc()) {
        Ok(f) => f,
        Err(_) => return false,
    };
    let set: HashSet<QForm> = reps.iter().copied().collect();
    let op = |x: &QForm, y: &QForm| compose(x, y).expect("same discriminant");
    for f in reps {
        if op(&id, f) != *f || op(f, &f.inverse()) != id {
            return false;
        }
        for g in reps {
            let fg = op(f, g);
            if !set.contains(&fg) || fg != op(g, f) {
                return false;
            }
            for h in reps {
                if op(&fg, h) != op(f, &op(g, h)) {
                    return false;
                }
            }
        }
    }
    true
}
