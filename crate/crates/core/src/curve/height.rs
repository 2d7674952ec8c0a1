//! Néron–Tate height as `lim h(x(2ⁿP))/4ⁿ`, `h(X/Z) = log max(|X|, |Z|)`.
//!
//! With `x = X/Z` in lowest terms on an integral model,
//! `x(2P) = φ(X, Z)/ψ(X, Z)` for the binary quartics
//! `φ = X⁴ − b4X²Z² − 2b6XZ³ − b8Z⁴` and `ψ = 4X³Z + b2X²Z² + 2b4XZ³ + b6Z⁴`.
//! Writing `g = gcd(φ, ψ)`, which divides the resultant `R`, each step satisfies
//! `|h(2Q) − 4h(Q)| ≤ C` with `C` read off from `φ, ψ` and the Bézout-type
//! identities `Fᵢφ + Gᵢψ = R·Z⁷`, `R·X⁷`. The tail after `n` doublings is then
//! at most `C/(3·4ⁿ)`.
//!
//! The iterates are never formed exactly: their size grows like `4ⁿ`. The
//! archimedean part `log max(|φ|, |ψ|)` is tracked on a normalised float pair,
//! and `log g` exactly from `X, Z` reduced modulo `R^(n+1)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use super::rational::{CurveQ, PointQ};
use super::Point;
use crate::arith::bigint_log;
use crate::error::{Error, Result};

/// Doublings beyond this are refused.
pub const MAX_DOUBLINGS: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeightEstimate<F> {
    pub value: F,
    /// Truncation bound plus a rounding allowance.
    pub error_bound: F,
    pub doublings: u32,
}

struct Quartics {
    phi: [BigInt; 5],
    psi: [BigInt; 5],
    resultant: BigInt,
    /// `C` in the module comment.
    step_constant: f64,
}

fn to_int(r: &BigRational) -> BigInt {
    debug_assert!(r.is_integer());
    r.to_integer()
}

fn eval_form(c: &[BigInt; 5], x: &BigInt, z: &BigInt) -> BigInt {
    // Horner in x with increasing powers of z
    let mut acc = c[0].clone();
    let mut zp = BigInt::one();
    for ci in &c[1..] {
        zp *= z;
        acc = acc * x + ci * &zp;
    }
    acc
}

fn eval_form_f<F: Float>(c: &[F; 5], x: F, z: F) -> F {
    let mut acc = c[0];
    let mut zp = F::one();
    for &ci in &c[1..] {
        zp = zp * z;
        acc = acc * x + ci * zp;
    }
    acc
}

/// Solves `S·v = b` over ℚ; returns `det S` and `v`.
fn solve(mut s: Vec<Vec<BigRational>>, rhs: &[Vec<BigRational>]) -> (BigRational, Vec<Vec<BigRational>>) {
    let n = s.len();
    let mut b: Vec<Vec<BigRational>> = rhs.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let piv = (col..n).find(|&r| !s[r][col].is_zero());
        let Some(piv) = piv else {
            return (BigRational::zero(), vec![]);
        };
        if piv != col {
            s.swap(piv, col);
            for rh in b.iter_mut() {
                rh.swap(piv, col);
            }
            det = -det;
        }
        let pv = s[col][col].clone();
        det *= &pv;
        for r in 0..n {
            if r == col || s[r][col].is_zero() {
                continue;
            }
            let f = &s[r][col] / &pv;
            for c in col..n {
                let t = &f * &s[col][c];
                s[r][c] -= t;
            }
            for rh in b.iter_mut() {
                let t = &f * &rh[col];
                rh[r] -= t;
            }
        }
    }
    let sol = b
        .into_iter()
        .map(|rh| (0..n).map(|i| &rh[i] / &s[i][i]).collect())
        .collect();
    (det, sol)
}

fn l1_log(coeffs: &[BigInt]) -> f64 {
    let sum: BigInt = coeffs.iter().map(|c| c.abs()).sum();
    bigint_log(&sum)
}

fn quartics(e: &CurveQ) -> Result<Quartics> {
    let w = &e.eq;
    let (b2, b4, b6, b8) = (to_int(&w.b2()), to_int(&w.b4()), to_int(&w.b6()), to_int(&w.b8()));
    let phi = [
        BigInt::one(),
        BigInt::zero(),
        -&b4,
        -(&b6 * BigInt::from(2)),
        -&b8,
    ];
    let psi = [BigInt::zero(), BigInt::from(4), b2, &b4 * BigInt::from(2), b6];
    // Columns: X^{3-j}Z^j·φ then X^{3-j}Z^j·ψ; rows: coefficient of X^{7-i}Z^i.
    let mut s = vec![vec![BigRational::zero(); 8]; 8];
    for j in 0..4 {
        for k in 0..5 {
            s[j + k][j] = BigRational::from_integer(phi[k].clone());
            s[j + k][4 + j] = BigRational::from_integer(psi[k].clone());
        }
    }
    let unit = |i: usize| -> Vec<BigRational> {
        (0..8)
            .map(|r| if r == i { BigRational::one() } else { BigRational::zero() })
            .collect()
    };
    let (det, sols) = solve(s, &[unit(7), unit(0)]);
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let resultant = to_int(&det);
    let mut c_low = 0f64;
    for v in &sols {
        let ints: Vec<BigInt> = v.iter().map(|c| to_int(&(c * &det))).collect();
        c_low = c_low.max(l1_log(&ints));
    }
    let c_up = l1_log(&phi).max(l1_log(&psi));
    Ok(Quartics {
        phi,
        psi,
        resultant,
        step_constant: c_up.max(c_low).max(0.0),
    })
}

/// `a/b` as f64 for `|a| ≤ |b|`, `b ≠ 0`.
fn ratio_f64(a: &BigInt, b: &BigInt) -> f64 {
    let shift = b.bits().saturating_sub(60);
    let a = (a >> shift).to_f64().unwrap_or(0.0);
    let b = (b >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}

pub fn canonical_height<F: Float>(e: &CurveQ, p: &PointQ, eps: F) -> Result<HeightEstimate<F>> {
    if !e.contains(p) {
        return Err(Error::PointNotOnCurve);
    }
    if !(eps > F::zero()) {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    let Point::Affine { .. } = p else {
        return Ok(HeightEstimate {
            value: F::zero(),
            error_bound: F::zero(),
            doublings: 0,
        });
    };
    let (model, ch) = e.integral_model();
    let Point::Affine { x, .. } = ch.apply_point(p) else {
        unreachable!()
    };
    let qd = quartics(&model)?;
    let fl = |v: f64| F::from(v).expect("float conversion");

    let c = qd.step_constant;
    let eps_f = eps.to_f64().unwrap_or(0.0);
    let mut n = 0u32;
    while c / (3.0 * 4f64.powi(n as i32)) > eps_f / 2.0 {
        n += 1;
        if n > MAX_DOUBLINGS {
            return Err(Error::PrecisionUnreachable(format!(
                "eps = {eps_f:e} needs more than {MAX_DOUBLINGS} doublings"
            )));
        }
    }
    let truncation = c / (3.0 * 4f64.powi(n as i32));
    let rounding = 64.0 * (n as f64 + 1.0) * (c + 2.0) * F::epsilon().to_f64().unwrap();
    if truncation + rounding > eps_f {
        return Err(Error::PrecisionUnreachable(format!(
            "eps = {eps_f:e} is below the rounding floor {rounding:e} of the float type"
        )));
    }

    let (xi, zi) = (x.numer().clone(), x.denom().clone());
    let h0 = bigint_log(&xi).max(bigint_log(&zi));

    // archimedean pair, normalised so that max(|x|, |z|) = 1
    let (xr, zr) = if xi.abs() >= zi {
        (if xi.is_negative() { -1.0 } else { 1.0 }, ratio_f64(&zi, &xi.abs()))
    } else {
        (ratio_f64(&xi, &zi), 1.0)
    };
    let (mut xr, mut zr) = (fl(xr), fl(zr));
    let phi_f = qd.phi.clone().map(|c| fl(c.to_f64().unwrap()));
    let psi_f = qd.psi.clone().map(|c| fl(c.to_f64().unwrap()));

    let r_abs = qd.resultant.abs();
    let mut modulus = num_traits::pow(r_abs.clone(), n as usize + 1);
    let (mut xm, mut zm) = (xi.mod_floor(&modulus), zi.mod_floor(&modulus));

    let mut value = fl(h0);
    let mut weight = F::one();
    let four = fl(4.0);
    for _ in 0..n {
        weight = weight / four;
        let u = eval_form_f(&phi_f, xr, zr);
        let v = eval_form_f(&psi_f, xr, zr);
        let m = u.abs().max(v.abs());
        xr = u / m;
        zr = v / m;

        let mut log_g = 0.0;
        if !r_abs.is_one() {
            let um = eval_form(&qd.phi, &xm, &zm).mod_floor(&modulus);
            let vm = eval_form(&qd.psi, &xm, &zm).mod_floor(&modulus);
            let g = um.gcd(&vm).gcd(&modulus);
            log_g = bigint_log(&g);
            modulus /= &g;
            xm = (um / &g).mod_floor(&modulus);
            zm = (vm / &g).mod_floor(&modulus);
        }
        value = value + weight * (m.ln() - fl(log_g));
    }
    rounding_guard(value)?;
    Ok(HeightEstimate {
        value,
        error_bound: fl(truncation + rounding),
        doublings: n,
    })
}

fn rounding_guard<F: Float>(v: F) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::PrecisionUnreachable("float overflow in doubling".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn resultant_is_discriminant_squared_37a() {
        let e = CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap();
        let qd = quartics(&e).unwrap();
        assert_eq!(qd.resultant.abs(), BigInt::from(37 * 37));
    }

    #[test]
    fn height_37a_generator() {
        let e = CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap();
        let h = canonical_height(&e, &Point::affine(q(0), q(0)), 1e-10).unwrap();
        assert!((h.value - 0.0511114082399688).abs() < 1e-9, "{}", h.value);
        assert!(h.error_bound <= 1e-10);
    }

    #[test]
    fn identity_has_height_zero() {
        let e = CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap();
        assert_eq!(canonical_height(&e, &Point::Infinity, 1e-3).unwrap().value, 0.0);
    }

    #[test]
    fn tiny_eps_rejected() {
        let e = CurveQ::from_ints([0, 0, 1, -1, 0], vec![37]).unwrap();
        assert!(matches!(
            canonical_height(&e, &Point::affine(q(0), q(0)), 1e-18),
            Err(Error::PrecisionUnreachable(_))
        ));
        assert!(matches!(
            canonical_height(&e, &Point::affine(q(0), q(0)), 1e-9f32),
            Err(Error::PrecisionUnreachable(_))
        ));
    }
}
