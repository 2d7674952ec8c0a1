//! Numerical Heegner points on `X₀(N) → E`.
//!
//! `z(τ) = Σ aₙ qⁿ/n` with `q = e^{2πiτ}` is the image of `τ` in `ℂ/Λ`, `Λ`
//! the period lattice of the given (assumed optimal, minimal) model with Manin
//! constant 1. Summing over one CM point per class of `Pic(O_K)` and applying
//! the Weierstrass parametrization gives the trace `y_K ∈ E(K)`, whose
//! x-coordinate is recognised as a rational number.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{gcd_i64, is_prime_u64, kronecker_i64};
use crate::curve::{
    canonical_height, count_points, is_nontorsion, quadpoint_to_twist, rational_to_string, CurveQ,
    Point, QuadPoint,
};
use crate::error::{Error, Result};
use crate::mp::{float_triple, Cx, Mp, Real};
use crate::quad::{class_group, heegner_hypothesis_disc, order_class_number, QForm, QuadOrder};
use crate::PointQ;

/// Point counts are refused beyond this many coefficients.
pub const MAX_TERMS: usize = 400_000;

/// How `a_p` is chosen at primes of bad reduction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum BadPrimeRule {
    /// `a_p = 0`, flagged in the warnings.
    #[default]
    Zero,
    /// `p + 1 − #E(𝔽_p)` on the given model: `±1` for multiplicative and 0
    /// for additive reduction when the model is minimal.
    Auto,
    /// Values for listed primes; unlisted ones fall back to 0 with a warning.
    Explicit(Vec<(u64, i64)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModularParam {
    pub level: u64,
    /// `an[n - 1] = a_n`.
    pub an: Vec<i64>,
    pub terms: usize,
    pub manin: u32,
    pub bad_ap: Vec<(u64, i64)>,
    pub warnings: Vec<String>,
}

impl ModularParam {
    pub fn a(&self, n: usize) -> i64 {
        self.an[n - 1]
    }
}

fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            for j in (i..=n).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    spf
}

fn small_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Coefficients `a_1..a_B` of the newform attached to `E`, with level the
/// product of the conductor primes.
pub fn build_an(e: &CurveQ, terms: usize, rule: &BadPrimeRule) -> Result<ModularParam> {
    let level: u64 = e.conductor_primes.iter().product();
    build_an_with_level(e, terms, rule, level)
}

/// As [`build_an`] with an explicit level whose prime divisors must be the
/// conductor primes.
pub fn build_an_with_level(
    e: &CurveQ,
    terms: usize,
    rule: &BadPrimeRule,
    level: u64,
) -> Result<ModularParam> {
    if terms == 0 {
        return Err(Error::Precondition("at least one coefficient is needed".into()));
    }
    if terms > MAX_TERMS {
        return Err(Error::Precondition(format!(
            "{terms} coefficients exceed the point-counting budget of {MAX_TERMS}"
        )));
    }
    let level_primes: Vec<u64> = small_factors(level).into_iter().map(|(p, _)| p).collect();
    if level_primes != e.conductor_primes {
        return Err(Error::Precondition(format!(
            "level {level} does not have the conductor primes {:?} as prime divisors",
            e.conductor_primes
        )));
    }
    let spf = smallest_prime_factors(terms);
    let primes: Vec<u64> = (2..=terms as u64).filter(|&p| spf[p as usize] as u64 == p).collect();
    let mut warnings = vec![];
    let mut bad_ap = vec![];
    let explicit: HashMap<u64, i64> = match rule {
        BadPrimeRule::Explicit(v) => v.iter().copied().collect(),
        _ => HashMap::new(),
    };
    for &p in &e.conductor_primes {
        let ap = match rule {
            BadPrimeRule::Zero => {
                warnings.push(format!("a_{p} set to 0 at bad prime {p}"));
                0
            }
            BadPrimeRule::Auto => {
                let n = e.reduce(p)?.count_all_points();
                p as i64 + 1 - n as i64
            }
            BadPrimeRule::Explicit(_) => match explicit.get(&p) {
                Some(&v) => v,
                None => {
                    warnings.push(format!("a_{p} not supplied; set to 0"));
                    0
                }
            },
        };
        if ap.abs() > 1 {
            return Err(Error::Precondition(format!("a_{p} = {ap} at a bad prime must be 0 or ±1")));
        }
        bad_ap.push((p, ap));
    }
    for p in explicit.keys() {
        if !e.conductor_primes.contains(p) {
            return Err(Error::Precondition(format!("{p} is not a conductor prime")));
        }
    }

    let ap: Vec<Result<(u64, i64)>> = primes
        .par_iter()
        .map(|&p| {
            if let Some(&(_, v)) = bad_ap.iter().find(|(q, _)| *q == p) {
                return Ok((p, v));
            }
            if !e.has_good_reduction(p) {
                return Err(Error::Precondition(format!(
                    "model has bad reduction at {p}, which is not a conductor prime"
                )));
            }
            let n = count_points(&e.reduce(p)?)?;
            Ok((p, p as i64 + 1 - n as i64))
        })
        .collect();
    let ap: HashMap<u64, i64> = ap.into_iter().collect::<Result<_>>()?;

    let mut an = vec![0i64; terms + 1];
    an[1] = 1;
    for n in 2..=terms {
        let p = spf[n] as usize;
        let mut m = n;
        let mut pk = 1usize;
        while m % p == 0 {
            m /= p;
            pk *= p;
        }
        if m == 1 {
            let a_p = ap[&(p as u64)];
            an[n] = if pk == p {
                a_p
            } else if level.is_multiple_of(p as u64) {
                a_p * an[pk / p]
            } else {
                a_p * an[pk / p] - p as i64 * an[pk / p / p]
            };
        } else {
            an[n] = an[pk] * an[m];
        }
    }
    an.remove(0);
    Ok(ModularParam {
        level,
        an,
        terms,
        manin: 1,
        bad_ap,
        warnings,
    })
}

/// `Ax² + Bxy + Cy²` of discriminant `c²D` with `N | A` and `B ≡ β mod 2N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HeegnerForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    /// Reduced representative of its class.
    pub class: QForm,
}

impl HeegnerForm {
    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// `τ = (−B + √disc)/(2A)`.
    pub fn tau<R: Real>(&self, proto: &R) -> Cx<R> {
        let two_a = proto.lift(2.0 * self.a as f64);
        let re = proto.lift(-(self.b as f64)) / two_a.clone();
        let im = proto.lift_int(&BigInt::from(-self.disc())).sqrt() / two_a;
        Cx::new(re, im)
    }
}

/// Smallest `β ∈ [0, 2N)` with `β² ≡ D mod 4N`.
pub fn sqrt_disc_mod_4n(d: i64, level: u64) -> Result<i64> {
    let n = level as i128;
    (0..2 * n)
        .find(|&b| (b * b - d as i128).rem_euclid(4 * n) == 0)
        .map(|b| b as i64)
        .ok_or_else(|| Error::NoSquareRoot(d.to_string(), (4 * level).to_string()))
}

fn check_split(d_k: i64, level: u64) -> Result<()> {
    for (p, _) in small_factors(level) {
        let k = kronecker_i64(d_k, p);
        if k != 1 {
            return Err(Error::HeegnerHypothesis(format!(
                "{p} is {} in Q(√{d_k})",
                if k == 0 { "ramified" } else { "inert" }
            )));
        }
    }
    Ok(())
}

/// An equivalent form whose leading coefficient is prime to `n`, taken as the
/// smallest such value `g(x, y)` over small coprime `(x, y)`.
fn with_leading_prime_to(g: &QForm, n: i128) -> Result<(i128, i128, i128)> {
    let (a, b, c) = (g.a as i128, g.b as i128, g.c as i128);
    let mut best: Option<(i128, i128, i128)> = None;
    for x in 0..=40i128 {
        for y in -40..=40i128 {
            if x.gcd(&y) != 1 || (x == 0 && y != 1) {
                continue;
            }
            let v = a * x * x + b * x * y + c * y * y;
            if v.gcd(&n) == 1 && best.is_none_or(|(bv, _, _)| v < bv) {
                best = Some((v, x, y));
            }
        }
    }
    let (v, x, y) = best.ok_or_else(|| Error::Internal(format!("no value of {g:?} prime to {n}")))?;
    // complete (x, y) to a matrix [[x, u], [y, w]] of determinant 1
    let (mut u, mut w) = (0i128, 0i128);
    let egcd = x.extended_gcd(&y);
    if egcd.gcd == 1 {
        (w, u) = (egcd.x, -egcd.y);
    } else if egcd.gcd == -1 {
        (w, u) = (-egcd.x, egcd.y);
    }
    debug_assert_eq!(x * w - y * u, 1);
    let nb = 2 * a * x * u + b * (x * w + y * u) + 2 * c * y * w;
    let nc = a * u * u + b * u * w + c * w * w;
    Ok((v, nb, nc))
}

/// One form per class of `Pic(O_c)`, `O_c` the order of conductor `c` in the
/// field of fundamental discriminant `d_k`. The square root `β` of `D_K` modulo
/// `4N` is fixed once and scaled by `c`; each form is the composite of a class
/// representative with `(N, cβ, ·)`, so `A = a·N` with `a` small.
pub fn heegner_forms(d_k: i64, level: u64, c: u64) -> Result<Vec<HeegnerForm>> {
    let order = QuadOrder::new(d_k, c as i64)?;
    if level == 0 {
        return Err(Error::Precondition("level must be positive".into()));
    }
    check_split(d_k, level)?;
    if gcd_i64(c as i64, level as i64) != 1 {
        return Err(Error::Precondition(format!("conductor {c} is not prime to the level {level}")));
    }
    let beta = sqrt_disc_mod_4n(d_k, level)? as i128;
    let n = level as i128;
    let d = order.d as i128;
    let b0 = (c as i128 * beta).rem_euclid(2 * n);
    let reps = class_group(&order)?.reps;
    let fit = |v: i128| i64::try_from(v).map_err(|_| Error::Precondition("form overflows i64".into()));
    let mut out = Vec::with_capacity(reps.len());
    for g in &reps {
        let (a1, b1, _) = with_leading_prime_to(g, n)?;
        // B ≡ b1 mod 2a1 and B ≡ b0 mod 2N, both ≡ D mod 2
        let inv = if a1 == 1 {
            0
        } else {
            crate::arith::inv_mod((n % a1) as i64, a1 as i64)
                .ok_or_else(|| Error::Internal("leading coefficient not prime to N".into()))? as i128
        };
        let k = (inv * ((b1 - b0) / 2)).rem_euclid(a1.max(1));
        let big_a = a1 * n;
        let mut b = (b0 + 2 * n * k).rem_euclid(2 * big_a);
        if b > big_a {
            b -= 2 * big_a;
        }
        let num = b * b - d;
        debug_assert_eq!(num % (4 * big_a), 0);
        let cc = num / (4 * big_a);
        let (fa, fb, fc) = (fit(big_a)?, fit(b)?, fit(cc)?);
        let class = QForm::new(fa, fb, fc)?.reduced();
        out.push(HeegnerForm { a: fa, b: fb, c: fc, class });
    }
    let distinct: std::collections::HashSet<_> = out.iter().map(|f| f.class).collect();
    if distinct.len() != out.len() || out.len() as u64 != order_class_number(d_k, c as i64)? {
        return Err(Error::Internal("Heegner forms do not cover Pic(O) once".into()));
    }
    Ok(out)
}

/// `z(τ)` with the number of terms summed and `log₂` of the truncation bound
/// `2|q|^{B+1}/(1 − |q|)`, valid since `|aₙ| ≤ d(n)√n ≤ 2n`.
#[derive(Clone, Debug)]
pub struct PhiValue<R> {
    pub z: Cx<R>,
    pub terms: usize,
    pub tail_log2: f64,
}

fn tail_log2(im_tau: f64, terms: usize) -> f64 {
    let lq = -2.0 * std::f64::consts::PI * im_tau;
    let q = lq.exp();
    (2f64.ln() + (terms as f64 + 1.0) * lq - (1.0 - q).ln()) / 2f64.ln()
}

/// Terms needed for the truncation bound to reach `2^-bits`.
pub fn terms_needed(im_tau: f64, bits: usize) -> usize {
    let lq = -2.0 * std::f64::consts::PI * im_tau;
    let q = lq.exp();
    let target = -(bits as f64) * 2f64.ln() - 2f64.ln() + (1.0 - q).ln();
    ((target / lq).ceil().max(1.0) as usize).saturating_sub(1).max(1)
}

fn target_bits(prec: usize) -> usize {
    prec.saturating_sub(8).max(8)
}

/// Sums exactly `terms` coefficients.
pub fn eval_phi_truncated<R: Real>(m: &ModularParam, tau: &Cx<R>, terms: usize) -> Result<PhiValue<R>> {
    let zero = tau.re.lift(0.0);
    if tau.im <= zero {
        return Err(Error::Precondition("τ must lie in the upper half-plane".into()));
    }
    if terms > m.terms {
        return Err(Error::PrecisionUnreachable(format!(
            "{terms} terms requested, {} available",
            m.terms
        )));
    }
    let q = tau.exp_2pi_i();
    let mut qn = Cx::one_like(&zero);
    let mut z = Cx::zero_like(&zero);
    for n in 1..=terms {
        qn = qn * q.clone();
        let a = m.a(n);
        if a != 0 {
            let coeff = zero.lift(a as f64) / zero.lift(n as f64);
            z = z + qn.scale(&coeff);
        }
    }
    Ok(PhiValue {
        z,
        terms,
        tail_log2: tail_log2(tau.im.to_f64(), terms),
    })
}

/// Sums as many terms as the working precision of `tau` calls for.
pub fn eval_phi<R: Real>(m: &ModularParam, tau: &Cx<R>) -> Result<PhiValue<R>> {
    let im = tau.im.to_f64();
    if !(im > 0.0) {
        return Err(Error::Precondition("τ must lie in the upper half-plane".into()));
    }
    let need = terms_needed(im, target_bits(tau.re.prec()));
    if need > m.terms {
        return Err(Error::PrecisionUnreachable(format!(
            "Im τ = {im:.3e} needs {need} terms for 2^-{} but only {} are available",
            target_bits(tau.re.prec()),
            m.terms
        )));
    }
    eval_phi_truncated(m, tau, need)
}

/// Real roots of `x³ + a x² + b x + c` in f64, descending.
fn real_roots_f64(a: f64, b: f64, c: f64) -> Vec<f64> {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut out = if disc < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .collect()
    } else {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    };
    out.sort_by(|x, y| y.partial_cmp(x).unwrap());
    out
}

fn newton<R: Real>(coef: &[R; 4], x0: R) -> R {
    let eps = x0.epsilon();
    let mut x = x0;
    for _ in 0..200 {
        let f = ((coef[0].clone() * x.clone() + coef[1].clone()) * x.clone() + coef[2].clone()) * x.clone()
            + coef[3].clone();
        let df = (coef[0].lift(3.0) * coef[0].clone() * x.clone() + coef[0].lift(2.0) * coef[1].clone()) * x.clone()
            + coef[2].clone();
        if df.is_zero() {
            break;
        }
        let step = f / df;
        x = x - step.clone();
        if step.abs() <= eps.clone() * x.abs().max(x.lift(1.0)) {
            break;
        }
    }
    x
}

fn agm<R: Real>(a: R, b: R) -> R {
    let eps = a.epsilon();
    let half = a.lift(0.5);
    let (mut a, mut b) = (a, b);
    for _ in 0..10_000 {
        if (a.clone() - b.clone()).abs() <= eps.clone() * a.abs() {
            break;
        }
        let next = (a.clone() + b.clone()) * half.clone();
        b = (a * b).sqrt();
        a = next;
    }
    a
}

/// Period lattice `ω1ℤ + ω2ℤ` of the model, `ω1` the least positive real period
/// and `Im(ω2/ω1) > 0`.
#[derive(Clone, Debug)]
pub struct PeriodLattice<R> {
    pub omega1: Cx<R>,
    pub omega2: Cx<R>,
    /// Basis with `ω2/ω1` in the standard fundamental domain; used for ℘.
    reduced: (Cx<R>, Cx<R>),
    a1: R,
    a3: R,
    b2: R,
}

impl<R: Real> PeriodLattice<R> {
    pub fn new(e: &CurveQ, proto: &R) -> Result<Self> {
        let w = &e.eq;
        let lift = |r: &BigRational| proto.lift_rational(r);
        let (b2, b4, b6) = (lift(&w.b2()), lift(&w.b4()), lift(&w.b6()));
        let coef = [proto.lift(4.0), b2.clone(), proto.lift(2.0) * b4.clone(), b6.clone()];
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        let approx = real_roots_f64(f(&w.b2()) / 4.0, f(&w.b4()) / 2.0, f(&w.b6()) / 4.0);
        let pi = proto.pi();
        let zero = proto.lift(0.0);
        let two = proto.lift(2.0);
        let (omega1, omega2) = if e.disc.is_positive() {
            if approx.len() != 3 {
                return Err(Error::Internal("expected three real roots".into()));
            }
            let mut r: Vec<R> = approx.iter().map(|&x| newton(&coef, proto.lift(x))).collect();
            r.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let (e1, e2, e3) = (r[0].clone(), r[1].clone(), r[2].clone());
            let w1 = pi.clone() / agm((e1.clone() - e3.clone()).sqrt(), (e1 - e2.clone()).sqrt());
            let w2 = pi / agm((r[0].clone() - e3.clone()).sqrt(), (e2 - e3).sqrt());
            (Cx::real(w1), Cx::new(zero, w2))
        } else {
            let e1 = newton(&coef, proto.lift(approx[0]));
            let a = proto.lift(3.0) * e1.clone() + b2.clone() / proto.lift(4.0);
            let b = (proto.lift(3.0) * e1.clone() * e1.clone() + b2.clone() / two.clone() * e1 + b4 / two.clone())
                .sqrt();
            let w1 = two.clone() * pi.clone()
                / agm(two.clone() * b.sqrt(), (two.clone() * b.clone() + a.clone()).sqrt());
            let im = pi / agm(two.clone() * b.sqrt(), (two.clone() * b - a).sqrt());
            (Cx::real(w1.clone()), Cx::new(-w1 / two, im))
        };
        let reduced = reduce_basis(omega1.clone(), omega2.clone());
        Ok(PeriodLattice {
            omega1,
            omega2,
            reduced,
            a1: lift(&w.a1),
            a3: lift(&w.a3),
            b2,
        })
    }

    pub fn tau(&self) -> Cx<R> {
        self.omega2.clone() / self.omega1.clone()
    }

    /// Real coordinates `(s, t)` with `z = s·ω1 + t·ω2`.
    pub fn coordinates(&self, z: &Cx<R>) -> (R, R) {
        let w = z.clone() / self.omega1.clone();
        let tau = self.tau();
        let t = w.im.clone() / tau.im.clone();
        let s = w.re - t.clone() * tau.re;
        (s, t)
    }

    /// Representative of `z` with both coordinates in `[−1/2, 1/2]`.
    pub fn reduce(&self, z: &Cx<R>) -> Cx<R> {
        let (s, t) = self.coordinates(z);
        z.clone() - self.omega1.scale(&s.round()) - self.omega2.scale(&t.round())
    }

    /// `(x, y)` on the model at `z`.
    pub fn elliptic_exp(&self, z: &Cx<R>) -> Result<(Cx<R>, Cx<R>)> {
        let (w1, w2) = &self.reduced;
        let zero = w1.re.lift(0.0);
        let one = Cx::one_like(&zero);
        let tau = w2.clone() / w1.clone();
        let mut w = z.clone() / w1.clone();
        let t = w.im.clone() / tau.im.clone();
        w = w - tau.scale(&t.round());
        w = w.clone() - Cx::real(w.re.round());
        let prec = zero.prec();
        let tol = zero.lift(2f64.powi(-(prec as i32 / 2).min(600)));
        if w.abs() < tol {
            return Err(Error::Pole);
        }
        let q = tau.exp_2pi_i();
        let u = w.exp_2pi_i();
        let u_inv = u.inv();
        let k = ((prec as f64 * 2f64.ln()) / (2.0 * std::f64::consts::PI * tau.im.to_f64())).ceil() as usize + 3;
        let cube = |v: &Cx<R>| v.clone() * v.square();
        let mut sum_p = Cx::real(zero.lift(1.0) / zero.lift(12.0)) + u.clone() / (one.clone() - u.clone()).square();
        let mut sum_d = u.clone() * (one.clone() + u.clone()) / cube(&(one.clone() - u.clone()));
        let mut qn = one.clone();
        for _ in 0..k {
            qn = qn * q.clone();
            let x1 = qn.clone() * u.clone();
            let x2 = qn.clone() * u_inv.clone();
            let two = zero.lift(2.0);
            sum_p = sum_p + x1.clone() / (one.clone() - x1.clone()).square()
                + x2.clone() / (one.clone() - x2.clone()).square()
                - (qn.clone() / (one.clone() - qn.clone()).square()).scale(&two);
            sum_d = sum_d + x1.clone() * (one.clone() + x1.clone()) / cube(&(one.clone() - x1))
                - x2.clone() * (one.clone() + x2.clone()) / cube(&(one.clone() - x2));
        }
        let two_pi = zero.pi() * zero.lift(2.0);
        let kf = Cx::new(zero.clone(), two_pi) / w1.clone();
        let wp = kf.square() * sum_p;
        let wpd = cube(&kf) * sum_d;
        let x = wp - Cx::real(self.b2.clone() / zero.lift(12.0));
        let y = (wpd - x.scale(&self.a1) - Cx::real(self.a3.clone())).scale(&zero.lift(0.5));
        Ok((x, y))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "omega1": [float_triple(&self.omega1.re), float_triple(&self.omega1.im)],
            "omega2": [float_triple(&self.omega2.re), float_triple(&self.omega2.im)],
        })
    }
}

/// Moves `ω2/ω1` into `|Re τ| ≤ 1/2, |τ| ≥ 1`.
fn reduce_basis<R: Real>(mut w1: Cx<R>, mut w2: Cx<R>) -> (Cx<R>, Cx<R>) {
    for _ in 0..1000 {
        let tau = w2.clone() / w1.clone();
        let n = tau.re.round();
        w2 = w2 - w1.scale(&n);
        let tau = w2.clone() / w1.clone();
        if tau.norm_sqr() >= tau.re.lift(1.0 - 1e-12) {
            break;
        }
        let old = w1;
        w1 = w2;
        w2 = -old;
    }
    (w1, w2)
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

/// Continued-fraction convergents of `x` with denominator at most `max_den`.
pub fn convergents(x: &BigRational, max_den: &BigInt) -> Vec<BigRational> {
    let mut out = vec![];
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut r = x.clone();
    for _ in 0..10_000 {
        let a = r.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > *max_den {
            break;
        }
        out.push(BigRational::new(h2.clone(), k2.clone()));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = &r - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        r = frac.recip();
    }
    out
}

/// Denominator bound `exp(2·digits/3)` for `digits` decimal digits of precision.
pub fn denominator_bound(prec: usize) -> BigInt {
    let digits = prec as f64 * 2f64.log10();
    let bits = (2.0 * digits / 3.0) / 2f64.ln();
    BigInt::one() << bits.floor() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    /// `y_K ∈ E(ℚ)`.
    Curve,
    /// `y_K` lies in the minus part, identified with `E^D(ℚ)`.
    Twist,
}

/// Outcome of a single evaluation at fixed precision.
#[derive(Clone, Debug)]
pub struct TraceRecognition {
    pub location: Location,
    /// Curve on which `point` lies: `E`, or the twist `E^D` in `y² = cubic` form.
    pub curve: CurveQ,
    /// `O` when the trace is torsion at the identity.
    pub point: PointQ,
    /// `point` is the image of `multiplier·y_K`; a multiplier above 1 clears
    /// the torsion component of the trace.
    pub multiplier: u64,
    pub z: (f64, f64),
    pub terms: usize,
    pub tail_log2: f64,
}

/// A multiple of the exponent of `E(K)_tors`: the gcd of `#E(𝔽_p)` over good
/// primes `p` split in `K`, into whose residue fields `E(K)_tors` injects.
pub fn torsion_multiplier(e: &CurveQ, d_k: i64) -> Result<u64> {
    let mut g = 0u64;
    let mut used = 0;
    for p in (3u64..5000).filter(|&p| is_prime_u64(p)) {
        if kronecker_i64(d_k, p) != 1 || !e.has_good_reduction(p) {
            continue;
        }
        g = g.gcd(&count_points(&e.reduce(p)?)?);
        used += 1;
        if used >= 12 || (used >= 2 && g == 1) {
            break;
        }
    }
    if used < 2 {
        return Err(Error::NoGoodPrimes(5000));
    }
    Ok(g)
}

/// `Σ z(τ)` over one Heegner form per class, reduced into the lattice's
/// fundamental parallelogram; also the terms used and `log₂` of the tail bound.
pub fn trace_z<R: Real>(
    lattice: &PeriodLattice<R>,
    d_k: i64,
    m: &ModularParam,
    proto: &R,
) -> Result<(Cx<R>, usize, f64)> {
    let forms = heegner_forms(d_k, m.level, 1)?;
    let values: Vec<PhiValue<R>> = forms
        .par_iter()
        .map(|f| eval_phi(m, &f.tau(proto)))
        .collect::<Result<_>>()?;
    let terms = values.iter().map(|v| v.terms).max().unwrap_or(0);
    let tail = values.iter().map(|v| v.tail_log2).fold(f64::NEG_INFINITY, f64::max)
        + (values.len() as f64).log2();
    let z = values
        .into_iter()
        .fold(Cx::zero_like(proto), |acc, v| acc + v.z);
    Ok((lattice.reduce(&z), terms, tail))
}

/// One pass at the precision of `proto`: the trace itself, then the multiple
/// by [`torsion_multiplier`] when the trace has no rational x-coordinate.
pub fn recognize_trace<R: Real>(
    e: &CurveQ,
    d_k: i64,
    m: &ModularParam,
    proto: &R,
) -> Result<TraceRecognition> {
    let lattice = PeriodLattice::new(e, proto)?;
    let (z, terms, tail) = trace_z(&lattice, d_k, m, proto)?;
    let first = recognize_point(e, d_k, &lattice, &z);
    let mult = match first {
        Ok(_) => 1,
        Err(Error::RecognitionFailed(_)) => torsion_multiplier(e, d_k)?,
        Err(err) => return Err(err),
    };
    let (found, z) = if mult > 1 {
        let mz = lattice.reduce(&z.scale(&proto.lift(mult as f64)));
        match recognize_point(e, d_k, &lattice, &mz) {
            Ok(r) => (r, mz),
            Err(Error::RecognitionFailed(msg)) => {
                return Err(Error::RecognitionFailed(format!(
                    "{}; after multiplying by {mult}: {msg}",
                    first.unwrap_err()
                )))
            }
            Err(err) => return Err(err),
        }
    } else {
        (first?, z)
    };
    let (location, curve, point) = found;
    Ok(TraceRecognition {
        location,
        curve,
        point,
        multiplier: mult,
        z: z.to_f64(),
        terms,
        tail_log2: tail,
    })
}

/// Rational point, on `E` or on `E^D`, whose image in `ℂ/Λ` is `z`.
fn recognize_point<R: Real>(
    e: &CurveQ,
    d_k: i64,
    lattice: &PeriodLattice<R>,
    z: &Cx<R>,
) -> Result<(Location, CurveQ, PointQ)> {
    let proto = &z.re;
    let (x, w) = match lattice.elliptic_exp(z) {
        Err(Error::Pole) => return Ok((Location::Curve, e.clone(), Point::Infinity)),
        Err(err) => return Err(err),
        Ok((x, y)) => {
            // w = 2y + a1x + a3 squares to the cubic 4x³ + b2x² + 2b4x + b6
            let w = y.scale(&proto.lift(2.0)) + x.scale(&lattice.a1) + Cx::real(lattice.a3.clone());
            (x, w)
        }
    };
    let prec = proto.prec();
    let loose = proto.lift(2f64.powi(-((prec * 3 / 4).min(900) as i32)));
    let scale = x.abs().max(proto.lift(1.0));
    if x.im.abs() > loose.clone() * scale.clone() {
        return Err(Error::RecognitionFailed(format!(
            "x = {:e} + {:e}i is not real at {prec} bits",
            x.re.to_f64(),
            x.im.to_f64()
        )));
    }
    let xr = x.re.to_rational();
    let tol = loose.to_rational() * scale.to_rational();
    let bound = denominator_bound(prec);
    let eq = &e.eq;
    let (b2, b4, b6) = (eq.b2(), eq.b4(), eq.b6());
    let int = |n: i64| BigRational::from_integer(n.into());
    let cubic = |x: &BigRational| int(4) * x * x * x + &b2 * x * x + int(2) * &b4 * x + &b6;
    let dq = int(d_k);
    for cand in convergents(&xr, &bound) {
        if (&cand - &xr).abs() > tol {
            continue;
        }
        let g = cubic(&cand);
        if let Some(root) = rational_sqrt(&g) {
            // real w: the sign follows the numeric value
            let wr = if w.re.is_negative_like() { -root } else { root };
            let y = (&wr - &eq.a1 * &cand - &eq.a3) / int(2);
            let p = Point::affine(cand, y);
            if !e.contains(&p) {
                return Err(Error::Internal("recognised point is off the curve".into()));
            }
            return Ok((Location::Curve, e.clone(), p));
        }
        if let Some(t) = rational_sqrt(&(&g / &dq)) {
            // w = t√D with √D = i√|D|
            let t = if w.im.is_negative_like() { -t } else { t };
            let (a2, ch) = e.a2_form();
            // Y² = X³ + b2X² + 8b4X + 16b6 with X = 4x, Y = 4w
            let Point::Affine { x: big_x, .. } = ch.apply_point(&Point::affine(cand, BigRational::zero())) else {
                unreachable!()
            };
            let qp = QuadPoint {
                x: big_x,
                y0: int(4) * &t,
                d: BigInt::from(d_k),
            };
            let (twist, pt) = quadpoint_to_twist(&qp, &a2)?;
            return Ok((Location::Twist, twist, pt));
        }
    }
    Err(Error::RecognitionFailed(format!(
        "no convergent of x ≈ {:e} with denominator ≤ 2^{} gives a point at {prec} bits",
        x.re.to_f64(),
        bound.bits() - 1
    )))
}

trait SignLike {
    fn is_negative_like(&self) -> bool;
}

impl<R: Real> SignLike for R {
    fn is_negative_like(&self) -> bool {
        *self < self.lift(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct HeegnerOptions {
    pub prec: usize,
    pub terms: usize,
    /// The ladder doubles precision and terms up to this precision.
    pub max_prec: usize,
    pub bad_primes: BadPrimeRule,
    pub level: Option<u64>,
    /// Generator compared by height ratio, on the curve where the point lands.
    pub generator: Option<PointQ>,
    pub height_eps: f64,
}

impl Default for HeegnerOptions {
    fn default() -> Self {
        HeegnerOptions {
            prec: 128,
            terms: 2000,
            max_prec: 1024,
            bad_primes: BadPrimeRule::Zero,
            level: None,
            generator: None,
            height_eps: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Attempt {
    pub prec: usize,
    pub terms: usize,
    pub outcome: String,
}

#[derive(Clone, Debug)]
pub struct HeegnerPoint {
    pub disc: i64,
    pub level: u64,
    pub beta: i64,
    pub forms: Vec<HeegnerForm>,
    pub trace: TraceRecognition,
    pub nontorsion: bool,
    pub height: Option<f64>,
    pub generator_height: Option<f64>,
    pub height_ratio: Option<f64>,
    /// `k` with `|ratio − k²| < 1e-6`.
    pub ratio_square_root: Option<u64>,
    pub prec: usize,
    pub attempts: Vec<Attempt>,
    pub warnings: Vec<String>,
    pub manin_constant: u32,
}

impl HeegnerPoint {
    pub fn to_json(&self) -> Value {
        let point = match &self.trace.point {
            Point::Infinity => Value::Null,
            Point::Affine { x, y } => json!([rational_to_string(x), rational_to_string(y)]),
        };
        let fl = |v: Option<f64>| v.map(|h| float_triple(&h)).unwrap_or(Value::Null);
        json!({
            "disc": self.disc,
            "level": self.level,
            "beta": self.beta,
            "forms": self.forms.iter().map(|f| json!([f.a, f.b, f.c])).collect::<Vec<_>>(),
            "location": self.trace.location,
            "curve": self.trace.curve.to_json(),
            "point": point,
            "torsion_trace": self.trace.point.is_infinity() || !self.nontorsion,
            "nontorsion": self.nontorsion,
            "height": fl(self.height),
            "generator_height": fl(self.generator_height),
            "height_ratio": fl(self.height_ratio),
            "ratio_square_root": self.ratio_square_root,
            "multiplier": self.trace.multiplier,
            "z": [float_triple(&self.trace.z.0), float_triple(&self.trace.z.1)],
            "precision": {
                "bits": self.prec,
                "terms": self.trace.terms,
                "tail_log2": self.trace.tail_log2,
                "attempts": self.attempts,
            },
            "manin_constant": self.manin_constant,
            "warnings": self.warnings,
        })
    }
}

/// Trace of the Heegner point of discriminant `d_k` to `E(K)`, recognised over
/// ℚ or on the twist, with the precision ladder of [`HeegnerOptions`].
pub fn heegner_point(e: &CurveQ, d_k: i64, opts: &HeegnerOptions) -> Result<HeegnerPoint> {
    let report = heegner_hypothesis_disc(&e.conductor_primes, &BigInt::from(d_k))?;
    if !report.strong {
        return Err(Error::HeegnerHypothesis(format!(
            "not every conductor prime splits in Q(√{d_k})"
        )));
    }
    let level = opts.level.unwrap_or_else(|| e.conductor_primes.iter().product());
    let forms = heegner_forms(d_k, level, 1)?;
    let beta = sqrt_disc_mod_4n(d_k, level)?;
    let mut attempts = vec![];
    let (mut prec, mut terms) = (opts.prec.max(16), opts.terms.max(1));
    let mut last_err = None;
    let mut warnings = vec![];
    let trace = loop {
        if prec > opts.max_prec.max(opts.prec) {
            let msg = last_err
                .map(|e: Error| e.to_string())
                .unwrap_or_else(|| "no attempt made".into());
            return Err(Error::RecognitionFailed(format!(
                "precision ladder exhausted at {} bits: {msg}",
                opts.max_prec
            )));
        }
        let need = forms
            .iter()
            .map(|f| terms_needed(f.tau(&0.0f64).im, target_bits(prec)))
            .max()
            .unwrap_or(1);
        terms = terms.max(need);
        if terms > MAX_TERMS {
            return Err(Error::PrecisionUnreachable(format!(
                "{terms} terms needed at {prec} bits, budget is {MAX_TERMS}"
            )));
        }
        let m = build_an_with_level(e, terms, &opts.bad_primes, level)?;
        if warnings.is_empty() {
            warnings = m.warnings.clone();
        }
        let res = recognize_trace(e, d_k, &m, &Mp::new(0.0, prec));
        match res {
            Ok(t) => {
                attempts.push(Attempt { prec, terms, outcome: "recognised".into() });
                break t;
            }
            Err(err @ (Error::RecognitionFailed(_) | Error::PrecisionUnreachable(_))) => {
                attempts.push(Attempt { prec, terms, outcome: err.to_string() });
                last_err = Some(err);
                prec *= 2;
                terms *= 2;
            }
            Err(err) => return Err(err),
        }
    };
    let nontorsion = is_nontorsion(&trace.curve, &trace.point)?;
    let mut height = None;
    let mut generator_height = None;
    let mut ratio = None;
    let mut root = None;
    if nontorsion {
        height = Some(canonical_height(&trace.curve, &trace.point, opts.height_eps)?.value);
    } else if trace.point.is_infinity() {
        height = Some(0.0);
    }
    if let Some(g) = &opts.generator {
        if trace.curve.contains(g) {
            let hg = canonical_height(&trace.curve, g, opts.height_eps)?.value;
            generator_height = Some(hg);
            if let (Some(h), true) = (height, hg > 0.0) {
                let r = h / hg;
                ratio = Some(r);
                let k = r.sqrt().round();
                if (r - k * k).abs() < 1e-6 {
                    root = Some(k as u64);
                }
            }
        } else {
            warnings.push("generator is not on the curve carrying the point; no height ratio".into());
        }
    }
    warnings.push("Manin constant assumed to be 1".into());
    Ok(HeegnerPoint {
        disc: d_k,
        level,
        beta,
        forms,
        trace,
        nontorsion,
        height,
        generator_height,
        height_ratio: ratio,
        ratio_square_root: root,
        prec,
        attempts,
        warnings,
        manin_constant: 1,
    })
}

#[derive(Clone, Debug)]
pub struct OrbitOptions {
    pub prec: usize,
    pub tolerance: f64,
    pub bad_primes: BadPrimeRule,
    pub level: Option<u64>,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            prec: 128,
            tolerance: 1e-10,
            bad_primes: BadPrimeRule::Zero,
            level: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRow {
    pub n: u32,
    pub conductor: u64,
    pub disc: i64,
    pub class_number: u64,
    pub forms: usize,
    pub distinct: usize,
    /// Index pairs closer than the tolerance in `ℂ/Λ`.
    pub collisions: Vec<(usize, usize)>,
    pub min_separation: f64,
    /// Separation divided by `min(1, max(|z_i|, |z_j|))`, compared with the
    /// tolerance.
    pub min_scaled_separation: f64,
    pub terms: usize,
    pub commentary: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    pub d_k: i64,
    pub p: u64,
    pub level: u64,
    pub prec: usize,
    pub tolerance: f64,
    pub rows: Vec<OrbitRow>,
}

impl OrbitReport {
    pub fn all_distinct(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.collisions.is_empty() && r.distinct as u64 == r.class_number)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut i = i;
        while self.0[i] != r {
            let next = self.0[i];
            self.0[i] = r;
            i = next;
        }
        r
    }
}

/// CM images `φ(τ)` of conductor `pⁿ` for `n ≤ n_max`, tested for pairwise
/// distinctness in `ℂ/Λ`.
pub fn orbit_growth_experiment(
    e: &CurveQ,
    d_k: i64,
    p: u64,
    n_max: u32,
    opts: &OrbitOptions,
) -> Result<OrbitReport> {
    let level = opts.level.unwrap_or_else(|| e.conductor_primes.iter().product());
    if !is_prime_u64(p) || kronecker_i64(d_k, p) != 1 {
        return Err(Error::Precondition(format!("{p} is not a prime split in Q(√{d_k})")));
    }
    if (2 * level).is_multiple_of(p) {
        return Err(Error::Precondition(format!("{p} divides 2N = {}", 2 * level)));
    }
    let proto = Mp::new(0.0, opts.prec);
    let lattice = PeriodLattice::new(e, &proto)?;
    let bits = target_bits(opts.prec);
    let mut levels = vec![];
    for n in 0..=n_max {
        let c = p
            .checked_pow(n)
            .ok_or_else(|| Error::Precondition("conductor overflows".into()))?;
        let forms = heegner_forms(d_k, level, c)?;
        let h = order_class_number(d_k, c as i64)?;
        let need = forms
            .iter()
            .map(|f| terms_needed(f.tau(&0.0f64).im, bits))
            .max()
            .unwrap_or(1);
        levels.push((n, c, forms, h, need));
    }
    let terms = levels.iter().map(|l| l.4).max().unwrap_or(1);
    if terms > MAX_TERMS {
        return Err(Error::PrecisionUnreachable(format!(
            "{terms} terms needed, budget is {MAX_TERMS}"
        )));
    }
    let m = build_an_with_level(e, terms, &opts.bad_primes, level)?;
    let mut rows = vec![];
    for (n, c, forms, h, need) in levels {
        let zs: Vec<(f64, f64)> = forms
            .par_iter()
            .map(|f| {
                let v = eval_phi(&m, &f.tau(&proto))?;
                let (s, t) = lattice.coordinates(&v.z);
                let frac = |x: Mp| (x.clone() - x.round()).to_f64();
                Ok((frac(s), frac(t)))
            })
            .collect::<Result<_>>()?;
        let (w1, w2) = (lattice.omega1.to_f64(), lattice.omega2.to_f64());
        let dist = |a: (f64, f64), b: (f64, f64)| {
            let wrap = |x: f64| x - x.round();
            let (ds, dt) = (wrap(a.0 - b.0), wrap(a.1 - b.1));
            let re = ds * w1.0 + dt * w2.0;
            let im = ds * w1.1 + dt * w2.1;
            // nearest translate among the neighbours of the wrapped difference
            let mut best = f64::INFINITY;
            for i in -1..=1 {
                for j in -1..=1 {
                    let (r, s) = (re + i as f64 * w1.0 + j as f64 * w2.0, im + i as f64 * w1.1 + j as f64 * w2.1);
                    best = best.min((r * r + s * s).sqrt());
                }
            }
            best
        };
        // near O the values, and their errors, scale with |z|
        let size: Vec<f64> = zs.iter().map(|&a| dist(a, (0.0, 0.0))).collect();
        let mut uf = UnionFind((0..zs.len()).collect());
        let mut collisions = vec![];
        let mut min_sep = f64::INFINITY;
        let mut min_scaled = f64::INFINITY;
        for i in 0..zs.len() {
            for j in i + 1..zs.len() {
                let d = dist(zs[i], zs[j]);
                let scaled = d / size[i].max(size[j]).min(1.0).max(f64::MIN_POSITIVE);
                min_sep = min_sep.min(d);
                min_scaled = min_scaled.min(scaled);
                if scaled < opts.tolerance {
                    collisions.push((i, j));
                    let (a, b) = (uf.find(i), uf.find(j));
                    uf.0[a] = b;
                }
            }
        }
        let distinct = (0..zs.len()).filter(|&i| uf.find(i) == i).count();
        let commentary = format!(
            "{distinct} pairwise distinct CM images of conductor {c} for #Pic = {h}; \
             a fixed-degree parametrization cannot keep this orbit bounded as n grows"
        );
        rows.push(OrbitRow {
            n,
            conductor: c,
            disc: d_k * (c as i64) * (c as i64),
            class_number: h,
            forms: forms.len(),
            distinct,
            collisions,
            min_separation: if min_sep.is_finite() { min_sep } else { 0.0 },
            min_scaled_separation: if min_scaled.is_finite() { min_scaled } else { 0.0 },
            terms: need,
            commentary,
        });
    }
    Ok(OrbitReport {
        d_k,
        p,
        level,
        prec: opts.prec,
        tolerance: opts.tolerance,
        rows,
    })
}

/// Smallest prime `p ∤ 2N` split in `ℚ(√d_k)`.
pub fn smallest_split_prime(d_k: i64, level: u64) -> u64 {
    (3..)
        .find(|&p| is_prime_u64(p) && !(2 * level).is_multiple_of(p) && kronecker_i64(d_k, p) == 1)
        .expect("split primes exist")
}
