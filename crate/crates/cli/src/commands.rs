use std::sync::Arc;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankforge::curve::parse_rational;
use rankforge::dihedral::{
    exhaustive_actions, involution_lift_count, make_gen_dihedral, random_candidate_action,
    verify_minus_one_argument, FiniteAbelian, ModuleAction, EXHAUSTIVE_LIMIT,
};
use rankforge::ff::{certify_ff, CurveFF, Gf};
use rankforge::heegner::{
    heegner_point, orbit_growth_experiment, smallest_split_prime, BadPrimeRule, HeegnerOptions,
    OrbitOptions,
};
use rankforge::quad::{class_group, QuadOrder};
use rankforge::twist::{
    build_f, certify_independence, find_candidates_with, prepare_curve, ScanOptions,
};
use rankforge::{CurveQ, Error, Point, Result};
use serde_json::{json, Value};

use crate::report::{Outcome, Output};
use crate::{Command, CurveArgs};

fn parse_primes(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|_| Error::Parse(format!("bad prime {t:?}"))))
        .collect()
}

fn parse_factors(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|_| Error::Parse(format!("bad cyclic factor {t:?}"))))
        .collect()
}

fn load_curve(c: &CurveArgs) -> Result<CurveQ> {
    CurveQ::from_json(&c.curve, parse_primes(&c.conductor_primes)?)
}

fn parse_bad_ap(s: &str) -> Result<BadPrimeRule> {
    match s.trim() {
        "zero" => Ok(BadPrimeRule::Zero),
        "auto" => Ok(BadPrimeRule::Auto),
        list => list
            .split(',')
            .map(|pair| {
                let (p, v) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("--bad-ap entry {pair:?} is not p:value")))?;
                let p = p.trim().parse().map_err(|_| Error::Parse(format!("bad prime in {pair:?}")))?;
                let v = v.trim().parse().map_err(|_| Error::Parse(format!("bad a_p in {pair:?}")))?;
                Ok((p, v))
            })
            .collect::<Result<Vec<_>>>()
            .map(BadPrimeRule::Explicit),
    }
}

fn parse_point(s: &str) -> Result<rankforge::PointQ> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(format!("generator: {e}")))?;
    let coord = |x: &Value| match x {
        Value::String(t) => parse_rational(t),
        Value::Number(n) if n.is_i64() => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("bad coordinate {other}"))),
    };
    match v.as_array().map(|a| a.as_slice()) {
        Some([x, y]) => Ok(Point::affine(coord(x)?, coord(y)?)),
        _ => Err(Error::Parse("generator must be [x, y]".into())),
    }
}

fn curve_inputs(c: &CurveArgs) -> Value {
    json!({"curve": c.curve, "conductor_primes": c.conductor_primes})
}

pub fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::Twists {
            curve,
            count,
            max_scan,
            height_eps,
        } => Outcome {
            inputs: json!({"curve": curve_inputs(curve), "count": count, "max_scan": max_scan, "height_eps": height_eps}),
            result: twists(curve, *count, *max_scan, *height_eps),
            precision_bits: None,
        },
        Command::FfTwists {
            q,
            curve,
            conductor_primes,
            count,
            max_scan,
        } => Outcome {
            inputs: json!({"q": q, "curve": curve, "conductor_primes": conductor_primes, "count": count, "max_scan": max_scan}),
            result: ff_twists(*q, curve, conductor_primes, *count, *max_scan),
            precision_bits: None,
        },
        Command::Heegner {
            curve,
            disc,
            prec,
            terms,
            max_prec,
            bad_ap,
            generator,
            level,
        } => Outcome {
            inputs: json!({
                "curve": curve_inputs(curve), "disc": disc, "prec": prec, "terms": terms,
                "max_prec": max_prec, "bad_ap": bad_ap, "generator": generator, "level": level,
            }),
            result: heegner(curve, *disc, *prec, *terms, *max_prec, bad_ap, generator.as_deref(), *level),
            precision_bits: Some(*prec),
        },
        Command::Classgroup { d } => Outcome {
            inputs: json!({"D": d}),
            result: classgroup(*d),
            precision_bits: None,
        },
        Command::Dihedral {
            from_classgroup,
            d,
            factors,
            module,
            check,
            samples,
            seed,
        } => Outcome {
            inputs: json!({
                "from_classgroup": from_classgroup, "D": d, "factors": factors, "module": module,
                "check": check, "samples": samples, "seed": seed,
            }),
            result: dihedral(*from_classgroup, *d, factors.as_deref(), module, check, *samples, *seed),
            precision_bits: None,
        },
        Command::Orbit {
            curve,
            disc,
            p,
            n_max,
            prec,
            tolerance,
            bad_ap,
            level,
        } => Outcome {
            inputs: json!({
                "curve": curve_inputs(curve), "disc": disc, "p": p, "n_max": n_max, "prec": prec,
                "tolerance": tolerance, "bad_ap": bad_ap, "level": level,
            }),
            result: orbit(curve, *disc, *p, *n_max, *prec, *tolerance, bad_ap, *level),
            precision_bits: Some(*prec),
        },
    }
}

fn twists(c: &CurveArgs, count: usize, max_scan: u64, height_eps: Option<f64>) -> Result<Output> {
    let e = load_curve(c)?;
    let (prepared, _) = prepare_curve(&e);
    let t = build_f(&prepared, &prepared.conductor_primes)?;
    let opts = ScanOptions {
        max_scan,
        ..ScanOptions::default()
    };
    let (candidates, stats) = find_candidates_with(&t, count, opts)?;
    let cert = certify_independence(&prepared, &candidates, height_eps)?;
    let verified = cert.is_valid()
        && candidates.iter().all(|cand| {
            cand.value < BigInt::from(0) && cand.point.satisfies(&prepared) && cand.hh.strong
        });
    Ok(Output {
        value: json!({
            "model": prepared.to_json(),
            "polynomial": t.to_json(),
            "stats": stats,
            "certificate": cert.to_json(),
        }),
        verified,
    })
}

fn ff_twists(q: u32, curve: &str, primes: &str, count: usize, max_scan: u64) -> Result<Output> {
    let field = Arc::new(Gf::new(q)?);
    let e = CurveFF::parse(&field, curve, primes)?;
    let cert = certify_ff(&e, count, max_scan)?;
    Ok(Output {
        verified: cert.is_valid(),
        value: cert.to_json(),
    })
}

#[allow(clippy::too_many_arguments)]
fn heegner(
    c: &CurveArgs,
    disc: i64,
    prec: usize,
    terms: usize,
    max_prec: usize,
    bad_ap: &str,
    generator: Option<&str>,
    level: Option<u64>,
) -> Result<Output> {
    let e = load_curve(c)?;
    let opts = HeegnerOptions {
        prec,
        terms,
        max_prec,
        bad_primes: parse_bad_ap(bad_ap)?,
        level,
        generator: generator.map(parse_point).transpose()?,
        ..HeegnerOptions::default()
    };
    let h = heegner_point(&e, disc, &opts)?;
    // a torsion trace is a legitimate outcome; only an incomparable generator fails
    let verified = match (h.nontorsion, &opts.generator) {
        (true, Some(_)) => h.ratio_square_root.is_some(),
        _ => true,
    };
    Ok(Output {
        value: h.to_json(),
        verified,
    })
}

fn classgroup(d: i64) -> Result<Output> {
    let order = QuadOrder::from_discriminant(d)?;
    let cg = class_group(&order)?;
    let mut v = cg.to_json();
    v["D_K"] = json!(order.d_k);
    v["conductor"] = json!(order.f);
    Ok(Output { value: v, verified: true })
}

fn dihedral(
    from_classgroup: bool,
    d: Option<i64>,
    factors: Option<&str>,
    module: &str,
    check: &str,
    samples: u64,
    seed: u64,
) -> Result<Output> {
    let a = match (from_classgroup, d, factors) {
        (true, Some(d), _) => FiniteAbelian::from_class_group(&class_group(&QuadOrder::from_discriminant(d)?)?),
        (false, _, Some(f)) => FiniteAbelian::new(parse_factors(f)?)?,
        _ => return Err(Error::Parse("give --from-classgroup -D <disc> or --factors".into())),
    };
    let checks: Vec<&str> = match check {
        "all" => vec!["relations", "squaring", "lifts", "minus-one"],
        "relations" | "squaring" | "lifts" | "minus-one" => vec![check],
        other => return Err(Error::Parse(format!("unknown check {other:?}"))),
    };
    let g = make_gen_dihedral(&a)?;
    let mut out = json!({
        "A": {"factors": a.factors, "order": a.order(), "odd": a.is_odd()},
        "G": {"order": g.order(), "abelian": g.is_abelian()},
    });
    let mut verified = true;
    for c in checks {
        match c {
            "relations" => {
                let inv = g.inversion_relation_holds();
                let inv2 = g.reflections_are_involutions();
                verified &= inv && inv2;
                out["relations"] = json!({"inversion": inv, "reflections_are_involutions": inv2});
            }
            "squaring" => {
                let bij = a.squaring_is_bijective();
                verified &= bij == a.is_odd();
                out["squaring_bijective"] = json!(bij);
            }
            "lifts" => {
                let n = involution_lift_count(&g);
                verified &= n == a.order();
                out["involution_lifts"] = json!(n);
            }
            _ => {
                let m = FiniteAbelian::new(parse_factors(module)?)?;
                out["minus_one"] = minus_one(&a, &m, samples, seed, &mut verified)?;
            }
        }
    }
    Ok(Output { value: out, verified })
}

/// Runs the argument over every action when the endomorphisms of `M` can be
/// enumerated, and over random candidates otherwise.
fn minus_one(a: &FiniteAbelian, m: &FiniteAbelian, samples: u64, seed: u64, verified: &mut bool) -> Result<Value> {
    if !a.is_odd() {
        let trivial = ModuleAction::minus_sigma_trivial(a, m);
        let reason = match verify_minus_one_argument(a, &trivial) {
            Err(e) => e.to_string(),
            Ok(_) => {
                *verified = false;
                "even order was not rejected".into()
            }
        };
        return Ok(json!({"applicable": false, "reason": reason}));
    }
    let (mode, actions) = match exhaustive_actions(a, m, EXHAUSTIVE_LIMIT) {
        Ok(acts) => ("exhaustive", acts),
        Err(_) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acts = vec![ModuleAction::minus_sigma_trivial(a, m)];
            acts.extend((0..samples).map(|_| random_candidate_action(a, m, &mut rng)));
            ("random", acts)
        }
    };
    let mut valid = 0u64;
    let mut rejected = 0u64;
    let mut all_trivial = true;
    for act in &actions {
        match verify_minus_one_argument(a, act) {
            Ok(r) => {
                valid += 1;
                all_trivial &= r.tau_sq_trivial && r.fixed_all;
            }
            Err(Error::Precondition(_)) => rejected += 1,
            Err(e) => return Err(e),
        }
    }
    *verified &= all_trivial && valid > 0;
    Ok(json!({
        "applicable": true,
        "module": m.factors,
        "mode": mode,
        "actions": actions.len(),
        "valid_actions": valid,
        "relation_failures": rejected,
        "all_fix_module": all_trivial,
    }))
}

#[allow(clippy::too_many_arguments)]
fn orbit(
    c: &CurveArgs,
    disc: i64,
    p: Option<u64>,
    n_max: u32,
    prec: usize,
    tolerance: f64,
    bad_ap: &str,
    level: Option<u64>,
) -> Result<Output> {
    let e = load_curve(c)?;
    let lvl = level.unwrap_or_else(|| e.conductor_primes.iter().product());
    let p = p.unwrap_or_else(|| smallest_split_prime(disc, lvl));
    let opts = OrbitOptions {
        prec,
        tolerance,
        bad_primes: parse_bad_ap(bad_ap)?,
        level,
    };
    let r = orbit_growth_experiment(&e, disc, p, n_max, &opts)?;
    Ok(Output {
        verified: r.all_distinct(),
        value: serde_json::to_value(&r).expect("serializable"),
    })
}
