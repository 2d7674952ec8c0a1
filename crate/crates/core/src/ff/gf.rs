//! `𝔽_q` for odd `q = p^k < 2^16`, elements coded as integers `Σ dᵢpⁱ` whose
//! base-`p` digits are coefficients in `𝔽_p[α]/(μ(α))`.

use std::fmt;

use crate::arith::is_prime_u64;
use crate::error::{Error, Result};

pub type Fq = u32;

pub struct Gf {
    pub p: u32,
    pub k: u32,
    pub q: u32,
    /// Minimal polynomial of `α` over `𝔽_p`, low to high, monic.
    pub modulus: Vec<u32>,
    exp: Vec<Fq>,
    log: Vec<u32>,
    /// Primitive element, a non-square.
    pub gen: Fq,
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl PartialEq for Gf {
    fn eq(&self, o: &Gf) -> bool {
        self.q == o.q && self.modulus == o.modulus
    }
}

fn digits(v: u32, p: u32, k: u32) -> Vec<u32> {
    let mut d = Vec::with_capacity(k as usize);
    let mut v = v;
    for _ in 0..k {
        d.push(v % p);
        v /= p;
    }
    d
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

/// Product in `𝔽_p[α]/(μ)` on digit vectors.
fn mul_digits(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] += x as u64 * y as u64;
        }
    }
    let p64 = p as u64;
    for v in prod.iter_mut() {
        *v %= p64;
    }
    for i in (k..2 * k).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for j in 0..k {
            let t = c * modulus[j] as u64 % p64;
            prod[i - k + j] = (prod[i - k + j] + p64 - t) % p64;
        }
    }
    prod[..k].iter().map(|&v| v as u32).collect()
}

fn is_irreducible_fp(m: &[u32], p: u32) -> bool {
    // trial division by every monic polynomial of degree ≤ k/2
    let k = m.len() - 1;
    for d in 1..=k / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut g = digits(code as u32, p, d as u32);
            g.push(1);
            if poly_rem_fp(m, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_fp(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&x| x as u64).collect();
    let db = b.len() - 1;
    let p64 = p as u64;
    while r.len() > db {
        let c = *r.last().unwrap() % p64;
        let shift = r.len() - 1 - db;
        for (j, &bj) in b.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p64 * p64 - c * bj as u64) % p64;
        }
        r.pop();
    }
    r.into_iter().map(|v| v as u32).collect()
}

impl Gf {
    pub fn new(q: u32) -> Result<Self> {
        if q < 3 || q.is_multiple_of(2) || q >= 1 << 16 {
            return Err(Error::Precondition(format!("q = {q} must be an odd prime power below 65536")));
        }
        let p = (3..=q).find(|&d| q.is_multiple_of(d)).unwrap();
        if !is_prime_u64(p as u64) {
            return Err(Error::Precondition(format!("{q} is not a prime power")));
        }
        let mut k = 0;
        let mut r = q;
        while r.is_multiple_of(p) {
            r /= p;
            k += 1;
        }
        if r != 1 {
            return Err(Error::Precondition(format!("{q} is not a prime power")));
        }
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            (0..p.pow(k))
                .map(|code| {
                    let mut m = digits(code, p, k);
                    m.push(1);
                    m
                })
                .find(|m| m[0] != 0 && is_irreducible_fp(m, p))
                .expect("irreducible polynomials exist")
        };
        let order = q - 1;
        let prime_factors: Vec<u32> = (2..=order).filter(|&d| order.is_multiple_of(d) && is_prime_u64(d as u64)).collect();
        let mulv = |a: u32, b: u32| -> u32 {
            if k == 1 {
                ((a as u64 * b as u64) % p as u64) as u32
            } else {
                undigits(&mul_digits(&digits(a, p, k), &digits(b, p, k), &modulus, p), p)
            }
        };
        let powv = |a: u32, mut e: u32| -> u32 {
            let (mut acc, mut b) = (1u32, a);
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulv(acc, b);
                }
                b = mulv(b, b);
                e >>= 1;
            }
            acc
        };
        let gen = (2..q)
            .find(|&g| prime_factors.iter().all(|&l| powv(g, order / l) != 1))
            .unwrap_or(2);
        let mut exp = vec![0; order as usize];
        let mut log = vec![0; q as usize];
        let mut x = 1;
        for i in 0..order {
            exp[i as usize] = x;
            log[x as usize] = i;
            x = mulv(x, gen);
        }
        Ok(Gf {
            p,
            k,
            q,
            modulus,
            exp,
            log,
            gen,
        })
    }

    pub fn from_int(&self, n: i64) -> Fq {
        n.rem_euclid(self.p as i64) as Fq
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.k == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        while a > 0 || b > 0 {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn neg(&self, a: Fq) -> Fq {
        if self.k == 1 {
            return (self.p - a) % self.p;
        }
        let (mut a, mut out, mut place) = (a, 0, 1);
        while a > 0 {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(s % (self.q - 1)) as usize]
    }

    pub fn inv(&self, a: Fq) -> Fq {
        assert!(a != 0, "inverse of zero in GF({})", self.q);
        let l = self.log[a as usize];
        self.exp[((self.q - 1 - l) % (self.q - 1)) as usize]
    }

    pub fn div(&self, a: Fq, b: Fq) -> Fq {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as u64 * (e % (self.q as u64 - 1));
        self.exp[(l % (self.q as u64 - 1)) as usize]
    }

    /// Nonzero squares are the even powers of the generator.
    pub fn is_square(&self, a: Fq) -> bool {
        a == 0 || self.log[a as usize].is_multiple_of(2)
    }

    pub fn sqrt(&self, a: Fq) -> Option<Fq> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize];
        l.is_multiple_of(2).then(|| self.exp[(l / 2) as usize])
    }

    /// `a^{1/p}`, the inverse of Frobenius.
    pub fn pth_root(&self, a: Fq) -> Fq {
        self.pow(a, (self.q / self.p) as u64)
    }

    /// `gⁱ`.
    pub fn gen_pow(&self, i: u64) -> Fq {
        self.exp[(i % (self.q as u64 - 1)) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_small() {
        for q in [3, 5, 9, 25, 27] {
            let f = Gf::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                    assert_eq!(f.pow(a, (q - 1) as u64), 1);
                }
                assert_eq!(f.pow(f.pth_root(a), f.p as u64), a);
                for b in 0..q {
                    for c in [0, 1, q - 1] {
                        let lhs = f.mul(a, f.add(b, c));
                        assert_eq!(lhs, f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
            let squares = (1..q).filter(|&a| f.is_square(a)).count() as u32;
            assert_eq!(squares, (q - 1) / 2);
            assert!(!f.is_square(f.gen));
        }
        assert!(Gf::new(15).is_err());
        assert!(Gf::new(4).is_err());
    }

    #[test]
    fn two_is_nonsquare_mod_3() {
        let f = Gf::new(3).unwrap();
        assert!(!f.is_square(2));
        assert_eq!(f.sqrt(1), Some(1));
    }
}
