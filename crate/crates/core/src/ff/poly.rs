//! Dense polynomials over `𝔽_q`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::gf::{Fq, Gf};
use crate::arith::is_prime_u64;
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct FqPoly {
    pub field: Arc<Gf>,
    /// Coefficients low to high, no trailing zeros.
    pub c: Vec<Fq>,
}

impl PartialEq for FqPoly {
    fn eq(&self, o: &FqPoly) -> bool {
        self.c == o.c
    }
}

impl Eq for FqPoly {}

impl std::hash::Hash for FqPoly {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.c.hash(h)
    }
}

impl fmt::Debug for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &a) in self.c.iter().enumerate().rev() {
            if a == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coeff = self.field_coeff_str(a);
            match (i, a == 1) {
                (0, _) => write!(f, "{coeff}")?,
                (_, true) => {}
                (_, false) => write!(f, "{coeff}*")?,
            }
            match i {
                0 => {}
                1 => write!(f, "T")?,
                _ => write!(f, "T^{i}")?,
            }
        }
        Ok(())
    }
}

impl FqPoly {
    pub fn new(field: &Arc<Gf>, mut c: Vec<Fq>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        FqPoly {
            field: field.clone(),
            c,
        }
    }

    pub fn zero(field: &Arc<Gf>) -> Self {
        Self::new(field, vec![])
    }

    pub fn one(field: &Arc<Gf>) -> Self {
        Self::constant(field, 1)
    }

    pub fn constant(field: &Arc<Gf>, a: Fq) -> Self {
        Self::new(field, vec![a])
    }

    /// The variable `T`.
    pub fn t(field: &Arc<Gf>) -> Self {
        Self::new(field, vec![0, 1])
    }

    /// `T - a`.
    pub fn linear(field: &Arc<Gf>, a: Fq) -> Self {
        Self::new(field, vec![field.neg(a), 1])
    }

    fn field_coeff_str(&self, a: Fq) -> String {
        let f = &self.field;
        if f.k == 1 {
            return a.to_string();
        }
        if a == 1 {
            return "1".into();
        }
        // powers of the primitive element read back unambiguously
        let i = (0..f.q as u64 - 1).find(|&i| f.gen_pow(i) == a).unwrap();
        match i {
            1 => "g".into(),
            _ => format!("g^{i}"),
        }
    }

    /// The `index`-th polynomial of degree `< len` via base-`q` digits.
    pub fn from_index(field: &Arc<Gf>, mut index: u64, len: usize) -> Self {
        let q = field.q as u64;
        let mut c = Vec::with_capacity(len);
        for _ in 0..len {
            c.push((index % q) as Fq);
            index /= q;
        }
        Self::new(field, c)
    }

    /// Monic polynomial of degree `d` with lower coefficients given by `index`.
    pub fn monic_from_index(field: &Arc<Gf>, index: u64, d: usize) -> Self {
        let mut p = Self::from_index(field, index, d);
        p.c.resize(d, 0);
        p.c.push(1);
        p
    }

    /// Degree first, then coefficients from the top.
    pub fn order_key(&self) -> (usize, Vec<Fq>) {
        (self.c.len(), self.c.iter().rev().copied().collect())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> Fq {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn scale(&self, a: Fq) -> Self {
        let f = &self.field;
        Self::new(f, self.c.iter().map(|&x| f.mul(x, a)).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.field.inv(self.lc()))
    }

    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.c);
        Self::new(&self.field, c)
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        let f = &self.field;
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|i| f.add(*self.c.get(i).unwrap_or(&0), *o.c.get(i).unwrap_or(&0)))
            .collect();
        Self::new(f, c)
    }

    pub fn neg_ref(&self) -> Self {
        let f = &self.field;
        Self::new(f, self.c.iter().map(|&x| f.neg(x)).collect())
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.field);
        }
        let f = &self.field;
        let mut c = vec![0; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = f.add(c[i + j], f.mul(a, b));
            }
        }
        Self::new(f, c)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(&self.field);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&b);
            }
            b = b.mul_ref(&b);
            e >>= 1;
        }
        acc
    }

    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let f = &self.field;
        let dd = d.c.len() - 1;
        if self.c.len() <= dd {
            return (Self::zero(f), self.clone());
        }
        let inv = f.inv(d.lc());
        let mut r = self.c.clone();
        let mut q = vec![0; r.len() - dd];
        for i in (0..q.len()).rev() {
            let coef = f.mul(r[i + dd], inv);
            q[i] = coef;
            if coef == 0 {
                continue;
            }
            for (j, &dj) in d.c.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(coef, dj));
            }
        }
        r.truncate(dd);
        (Self::new(f, q), Self::new(f, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    /// Quotient, which must be exact.
    pub fn div_exact(&self, d: &Self) -> Self {
        let (q, r) = self.divrem(d);
        debug_assert!(r.is_zero(), "inexact division {self} / {d}");
        q
    }

    pub fn divides(&self, n: &Self) -> bool {
        n.rem(self).is_zero()
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, u, v)` with `g = u·self + v·o` monic.
    pub fn xgcd(&self, o: &Self) -> (Self, Self, Self) {
        let f = &self.field;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Self::one(f), Self::zero(f));
        let (mut t0, mut t1) = (Self::zero(f), Self::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            (r0, r1) = (r1, r);
            let s2 = s0.sub_ref(&q.mul_ref(&s1));
            (s0, s1) = (s1, s2);
            let t2 = t0.sub_ref(&q.mul_ref(&t1));
            (t0, t1) = (t1, t2);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = f.inv(r0.lc());
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    /// Inverse modulo `m`, if coprime.
    pub fn invmod(&self, m: &Self) -> Option<Self> {
        let (g, u, _) = self.xgcd(m);
        g.is_one().then(|| u.rem(m))
    }

    /// Horner evaluation at a field element.
    pub fn eval(&self, x: Fq) -> Fq {
        let f = &self.field;
        self.c.iter().rev().fold(0, |acc, &a| f.add(f.mul(acc, x), a))
    }

    /// `self(g)`.
    pub fn compose(&self, g: &Self) -> Self {
        self.c
            .iter()
            .rev()
            .fold(Self::zero(&self.field), |acc, &a| acc.mul_ref(g).add_ref(&Self::constant(&self.field, a)))
    }

    pub fn derivative(&self) -> Self {
        let f = &self.field;
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| f.mul(a, f.from_int(i as i64)))
            .collect();
        Self::new(f, c)
    }

    /// `h` with `h^p = self`; requires a vanishing derivative.
    pub fn pth_root(&self) -> Self {
        let f = &self.field;
        let p = f.p as usize;
        let c = self.c.iter().step_by(p).map(|&a| f.pth_root(a)).collect();
        Self::new(f, c)
    }

    pub fn mulmod(&self, o: &Self, m: &Self) -> Self {
        self.mul_ref(o).rem(m)
    }

    pub fn powmod(&self, mut e: u64, m: &Self) -> Self {
        let mut acc = Self::one(&self.field).rem(m);
        let mut b = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mulmod(&b, m);
            }
            b = b.mulmod(&b, m);
            e >>= 1;
        }
        acc
    }

    /// `self^{q^k} mod m` by repeated Frobenius.
    fn frobenius_iter(&self, k: usize, m: &Self) -> Self {
        let q = self.field.q as u64;
        (0..k).fold(self.rem(m), |acc, _| acc.powmod(q, m))
    }

    /// Rabin's test.
    pub fn is_irreducible(&self) -> bool {
        let n = match self.degree() {
            None | Some(0) => return false,
            Some(1) => return true,
            Some(n) => n,
        };
        let t = Self::t(&self.field);
        if !t.frobenius_iter(n, self).sub_ref(&t).rem(self).is_zero() {
            return false;
        }
        (2..=n).filter(|&r| n % r == 0 && is_prime_u64(r as u64)).all(|r| {
            let h = t.frobenius_iter(n / r, self).sub_ref(&t);
            self.gcd(&h).is_one()
        })
    }

    /// Coprime squarefree factors `(g, m)` with `self.monic() = Π g^m`.
    pub fn squarefree_factors(&self) -> Vec<(Self, u64)> {
        assert!(!self.is_zero(), "squarefree decomposition of zero");
        let mut out = Vec::new();
        yun(&self.monic(), 1, &mut out);
        out
    }

    /// `self = u·s²` with `u` squarefree (carrying the leading coefficient)
    /// and `s` monic.
    pub fn square_split(&self) -> (Self, Self) {
        let f = &self.field;
        let mut u = Self::constant(f, self.lc());
        let mut s = Self::one(f);
        for (g, m) in self.squarefree_factors() {
            if m % 2 == 1 {
                u = u.mul_ref(&g);
            }
            s = s.mul_ref(&g.pow(m / 2));
        }
        (u, s)
    }

    /// Monic irreducibles of degree `d`, in index order.
    pub fn monic_irreducibles(field: &Arc<Gf>, d: usize) -> impl Iterator<Item = Self> + '_ {
        let count = (field.q as u64).pow(d as u32);
        (0..count)
            .map(move |i| Self::monic_from_index(field, i, d))
            .filter(|p| p.is_irreducible())
    }

    /// Parses `2*T^3 + g^4*T + 1` style input; integers reduce mod `p`, `g` is
    /// the primitive element of `𝔽_q`.
    pub fn parse(field: &Arc<Gf>, s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("polynomial {s:?}: {m}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 && !compact[..i].ends_with('^') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut acc = Self::zero(field);
        for term in terms {
            let (neg, body) = match term.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, term.strip_prefix('+').unwrap_or(&term)),
            };
            if body.is_empty() {
                return Err(bad("dangling sign"));
            }
            let mut coeff: Fq = 1;
            let mut deg = 0usize;
            for factor in body.split('*') {
                let (base, exp) = match factor.split_once('^') {
                    Some((b, e)) => (b, e.parse::<u64>().map_err(|_| bad("bad exponent"))?),
                    None => (factor, 1),
                };
                match base {
                    "T" | "t" => deg += exp as usize,
                    "g" => coeff = field.mul(coeff, field.gen_pow(exp)),
                    num => {
                        let n: i64 = num.parse().map_err(|_| bad(&format!("unknown token {num:?}")))?;
                        coeff = field.mul(coeff, field.pow(field.from_int(n), exp));
                    }
                }
            }
            if neg {
                coeff = field.neg(coeff);
            }
            let mut c = vec![0; deg + 1];
            c[deg] = coeff;
            acc = acc.add_ref(&Self::new(field, c));
        }
        Ok(acc)
    }
}

/// Yun's algorithm, with the characteristic-`p` step for `f' = 0` parts.
fn yun(f: &FqPoly, mult: u64, out: &mut Vec<(FqPoly, u64)>) {
    if f.is_constant() {
        return;
    }
    let p = f.field.p as u64;
    let df = f.derivative();
    if df.is_zero() {
        yun(&f.pth_root(), mult * p, out);
        return;
    }
    let mut c = f.gcd(&df);
    let mut w = f.div_exact(&c);
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let z = w.div_exact(&y);
        if !z.is_one() {
            out.push((z, i * mult));
        }
        i += 1;
        w = y;
        c = c.div_exact(&w);
    }
    if !c.is_one() {
        yun(&c.pth_root(), mult * p, out);
    }
}

impl Add for FqPoly {
    type Output = FqPoly;
    fn add(self, o: FqPoly) -> FqPoly {
        self.add_ref(&o)
    }
}

impl Sub for FqPoly {
    type Output = FqPoly;
    fn sub(self, o: FqPoly) -> FqPoly {
        self.sub_ref(&o)
    }
}

impl Mul for FqPoly {
    type Output = FqPoly;
    fn mul(self, o: FqPoly) -> FqPoly {
        self.mul_ref(&o)
    }
}

impl Neg for FqPoly {
    type Output = FqPoly;
    fn neg(self) -> FqPoly {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> Arc<Gf> {
        Arc::new(Gf::new(q).unwrap())
    }

    #[test]
    fn parse_and_print() {
        let k = f(3);
        let p = FqPoly::parse(&k, "T^3 - T + 2").unwrap();
        assert_eq!(p.c, vec![2, 2, 0, 1]);
        assert_eq!(p.to_string(), "T^3 + 2*T + 2");
        assert_eq!(FqPoly::parse(&k, &p.to_string()).unwrap(), p);
        let k9 = f(9);
        let h = FqPoly::parse(&k9, "g*T^2 + g^2").unwrap();
        assert_eq!(FqPoly::parse(&k9, &h.to_string()).unwrap(), h);
        assert!(FqPoly::parse(&k, "T^").is_err());
        assert!(FqPoly::parse(&k, "x+1").is_err());
    }

    #[test]
    fn division_and_gcd() {
        let k = f(5);
        let a = FqPoly::parse(&k, "T^4 + 3*T^2 + T + 1").unwrap();
        let b = FqPoly::parse(&k, "2*T^2 + 1").unwrap();
        let (q, r) = a.divrem(&b);
        assert_eq!(q.mul_ref(&b).add_ref(&r), a);
        assert!(r.degree().is_none_or(|d| d < 2));
        let g = FqPoly::parse(&k, "T + 2").unwrap();
        assert_eq!(a.mul_ref(&g).gcd(&b.mul_ref(&g)), g);
    }

    #[test]
    fn irreducible_counts() {
        // number of monic irreducibles of degree d over 𝔽_q by Möbius
        let k = f(3);
        let counts: Vec<usize> = (1..=4).map(|d| FqPoly::monic_irreducibles(&k, d).count()).collect();
        assert_eq!(counts, vec![3, 3, 8, 18]);
        let k9 = f(9);
        assert_eq!(FqPoly::monic_irreducibles(&k9, 2).count(), 36);
    }

    #[test]
    fn squarefree_char_p() {
        let k = f(3);
        let t = FqPoly::t(&k);
        let a = FqPoly::parse(&k, "T + 1").unwrap();
        let b = FqPoly::parse(&k, "T^2 + 1").unwrap();
        // a^3 has zero derivative; the p-th root step must find it
        let n = a.pow(3).mul_ref(&b.pow(2)).mul_ref(&t).scale(2);
        let mut fs = n.squarefree_factors();
        fs.sort_by_key(|(_, m)| *m);
        assert_eq!(fs, vec![(t.clone(), 1), (b.clone(), 2), (a.clone(), 3)]);
        let (u, s) = n.square_split();
        assert_eq!(u, a.mul_ref(&t).scale(2));
        assert_eq!(s, a.mul_ref(&b));
        assert_eq!(u.mul_ref(&s.mul_ref(&s)), n);
    }

    #[test]
    fn compose_and_eval() {
        let k = f(7);
        let p = FqPoly::parse(&k, "T^2 + 3").unwrap();
        let g = FqPoly::parse(&k, "2*T + 1").unwrap();
        let c = p.compose(&g);
        for x in 0..7 {
            assert_eq!(c.eval(x), p.eval(g.eval(x)));
        }
    }
}
