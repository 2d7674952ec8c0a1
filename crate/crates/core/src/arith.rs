//! Elementary integer arithmetic: primality, factoring, squarefree parts,
//! Kronecker symbols and modular square roots.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Trial division limit used before switching to Pollard rho.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as i64)
}

/// Reduce an arbitrary integer into `[0, m)`.
pub fn mod_u64(n: &BigInt, m: u64) -> u64 {
    let digits: Vec<u64> = n.magnitude().iter_u64_digits().collect();
    let mut r = 0u128;
    for &d in digits.iter().rev() {
        r = ((r << 64) | d as u128) % m as u128;
    }
    let r = r as u64;
    if n.is_negative() && r != 0 {
        m - r
    } else {
        r
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller–Rabin with the first twenty prime bases; exact below 3.3·10^24.
pub fn is_probable_prime(n: &BigInt) -> bool {
    if n.sign() != Sign::Plus {
        return false;
    }
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let n = n.magnitude();
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    const BASES: [u32; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];
    for &b in BASES.iter() {
        if (n % b).is_zero() {
            return false;
        }
    }
    'witness: for &b in BASES.iter() {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(k, &p)| p.then_some(k as u64))
        .collect()
}

/// Prime factorisation of a nonzero integer. `unfactored` holds a composite
/// cofactor that Pollard rho could not split within its budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i32,
    pub factors: Vec<(BigInt, u32)>,
    pub unfactored: Option<BigInt>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_none()
    }
}

fn pollard_brent(n: &BigInt, seed: u64, budget: u64) -> Option<BigInt> {
    if n.is_even() {
        return Some(BigInt::from(2));
    }
    let c = BigInt::from(seed);
    let f = |x: &BigInt| (x * x + &c) % n;
    let mut y = BigInt::from(seed + 1);
    let mut r: u64 = 1;
    let m: u64 = 128;
    let mut q = BigInt::one();
    let mut g = BigInt::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut steps = 0u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = (q * (&x - &y).abs()) % n;
            }
            g = q.gcd(n);
            k += m;
            steps += m;
            if steps > budget {
                return None;
            }
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = (&x - &ys).abs().gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

/// Factor `n` by trial division to `trial_bound` and Pollard rho beyond,
/// spending at most `rho_budget` iterations per split attempt.
pub fn factor(n: &BigInt, trial_bound: u64, rho_budget: u64) -> Factorization {
    assert!(!n.is_zero(), "cannot factor zero");
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut rest = n.abs();
    let mut found: Vec<(BigInt, u32)> = Vec::new();
    let push = |p: BigInt, e: u32, found: &mut Vec<(BigInt, u32)>| {
        if let Some(slot) = found.iter_mut().find(|(q, _)| *q == p) {
            slot.1 += e;
        } else {
            found.push((p, e));
        }
    };
    let mut d = 2u64;
    while d <= trial_bound {
        if let Some(r) = rest.to_u64() {
            if d.saturating_mul(d) > r {
                break;
            }
        }
        if mod_u64(&rest, d) == 0 {
            let mut e = 0;
            while mod_u64(&rest, d) == 0 {
                rest /= d;
                e += 1;
            }
            push(BigInt::from(d), e, &mut found);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let mut unfactored: Option<BigInt> = None;
    let mut stack = vec![];
    if !rest.is_one() {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        let bound = BigInt::from(trial_bound);
        if m <= (&bound * &bound) || is_probable_prime(&m) {
            push(m, 1, &mut found);
            continue;
        }
        let r = m.sqrt();
        if &r * &r == m {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        let mut split = None;
        for seed in 1..=4u64 {
            if let Some(g) = pollard_brent(&m, seed, rho_budget) {
                split = Some(g);
                break;
            }
        }
        match split {
            Some(g) => {
                let h = &m / &g;
                stack.push(g);
                stack.push(h);
            }
            None => {
                unfactored = Some(match unfactored {
                    Some(u) => u * m,
                    None => m,
                });
            }
        }
    }
    found.sort();
    Factorization {
        sign,
        factors: found,
        unfactored,
    }
}

/// Write `n = d·s²` with `d` squarefree (carrying the sign of `n`) and
/// `s > 0`. Returns `None` when the factorisation is incomplete.
pub fn squarefree_decomposition(n: &BigInt) -> Option<(BigInt, BigInt)> {
    let fac = factor(n, TRIAL_DIVISION_BOUND, 200_000);
    if !fac.is_complete() {
        return None;
    }
    let mut d = BigInt::from(fac.sign);
    let mut s = BigInt::one();
    for (p, e) in &fac.factors {
        if e % 2 == 1 {
            d *= p;
        }
        s *= num_traits::pow(p.clone(), (*e / 2) as usize);
    }
    Some((d, s))
}

pub fn is_squarefree_i64(n: i64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n.unsigned_abs();
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Kronecker symbol (a | n) for n ≥ 1.
pub fn kronecker(a: &BigInt, n: u64) -> i32 {
    assert!(n >= 1);
    let mut n = n;
    let mut result = 1i32;
    let mut a_mod;
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a.is_even() {
            return 0;
        }
        let a8 = mod_u64(a, 8);
        if tz % 2 == 1 && (a8 == 3 || a8 == 5) {
            result = -result;
        }
        n >>= tz;
    }
    if n == 1 {
        return result;
    }
    // Jacobi symbol for odd n.
    a_mod = mod_u64(a, n);
    let mut m = n;
    while a_mod != 0 {
        while a_mod % 2 == 0 {
            a_mod /= 2;
            let r = m % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a_mod, &mut m);
        if a_mod % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a_mod %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

pub fn kronecker_i64(a: i64, n: u64) -> i32 {
    kronecker(&BigInt::from(a), n)
}

/// Square root of `a` modulo an odd prime `p` (Tonelli–Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Split a negative discriminant as `D = f²·D_K` with `D_K` fundamental.
pub fn fundamental_part(d: i64) -> crate::Result<(i64, i64)> {
    if d >= 0 || d.rem_euclid(4) > 1 {
        return Err(crate::Error::InvalidDiscriminant(d));
    }
    let fac = factor(&BigInt::from(d), TRIAL_DIVISION_BOUND, 100_000);
    let mut core = -1i64;
    let mut f = 1i64;
    for (p, e) in &fac.factors {
        let p = p.to_i64().expect("small prime");
        if e % 2 == 1 {
            core *= p;
        }
        f *= p.pow(e / 2);
    }
    // core is squarefree with D = core·f²
    if core.rem_euclid(4) == 1 {
        Ok((core, f))
    } else {
        // D_K = 4·core and the conductor loses a factor of 2
        debug_assert!(f % 2 == 0);
        Ok((4 * core, f / 2))
    }
}

/// Whether `d` is a fundamental discriminant.
pub fn is_fundamental(d: i64) -> bool {
    fundamental_part(d).map(|(dk, f)| dk == d && f == 1).unwrap_or(false)
}

pub fn bigint_log(n: &BigInt) -> f64 {
    let n = n.magnitude();
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(561));
        assert!(is_probable_prime(&"170141183460469231731687303715884105727".parse().unwrap()));
    }

    #[test]
    fn factor_with_rho() {
        // 1000003 · 1000033 · 17² forces the rho path past trial division.
        let n = BigInt::from(1_000_003u64) * BigInt::from(1_000_033u64) * BigInt::from(289);
        let fac = factor(&n, 1000, 100_000);
        assert!(fac.is_complete());
        assert_eq!(
            fac.factors,
            vec![
                (BigInt::from(17), 2),
                (BigInt::from(1_000_003), 1),
                (BigInt::from(1_000_033), 1)
            ]
        );
    }

    #[test]
    fn squarefree_parts() {
        let (d, s) = squarefree_decomposition(&BigInt::from(-3_338_130_416i64)).unwrap();
        assert_eq!(d, BigInt::from(-208_633_151));
        assert_eq!(s, BigInt::from(4));
        let (d, s) = squarefree_decomposition(&BigInt::from(-64)).unwrap();
        assert_eq!((d, s), (BigInt::from(-1), BigInt::from(8)));
    }

    #[test]
    fn kronecker_values() {
        assert_eq!(kronecker_i64(-7, 37), 1);
        assert_eq!(kronecker_i64(-4, 2), 0);
        assert_eq!(kronecker_i64(-4, 3), -1);
        assert_eq!(kronecker_i64(-3, 37), 1);
        assert_eq!(kronecker_i64(-7, 2), 1);
        assert_eq!(kronecker_i64(5, 2), -1);
        assert_eq!(kronecker_i64(-23, 3), 1);
    }

    #[test]
    fn tonelli() {
        for p in [3u64, 5, 13, 37, 97, 65537] {
            for a in 1..p.min(200) {
                if let Some(r) = sqrt_mod_prime(a, p) {
                    assert_eq!(mul_mod(r, r, p), a % p);
                }
            }
        }
    }

    #[test]
    fn fundamental_split() {
        assert_eq!(fundamental_part(-100).unwrap(), (-4, 5));
        assert_eq!(fundamental_part(-2500).unwrap(), (-4, 25));
        assert_eq!(fundamental_part(-7 * 121).unwrap(), (-7, 11));
        assert_eq!(fundamental_part(-12).unwrap(), (-3, 2));
        assert_eq!(fundamental_part(-8).unwrap(), (-8, 1));
        assert!(fundamental_part(-5).is_err());
        assert!(is_fundamental(-23));
        assert!(!is_fundamental(-27));
    }
}
