use std::time::Instant;

use rankforge::mp::float_triple;
use rankforge::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::Command;

/// What a subcommand produced: the parsed inputs always, then either the
/// outputs with their verification verdict or the error.
pub struct Outcome {
    pub inputs: Value,
    pub result: Result<Output, Error>,
    pub precision_bits: Option<usize>,
}

pub struct Output {
    pub value: Value,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Vec<String>,
    pub status: String,
    pub inputs: Value,
    pub outputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
    pub provenance: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Value>,
}

/// Input mistakes, as opposed to computations that ran and failed.
fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_)
            | Error::Precondition(_)
            | Error::InvalidDiscriminant(..)
            | Error::NotFundamental(..)
            | Error::MismatchedDiscriminants(..)
            | Error::InvalidForm(..)
            | Error::PrimeDividesDiscriminant(..)
            | Error::NonIntegral(_)
            | Error::NotShortForm(_)
            | Error::Singular
            | Error::HeegnerHypothesis(_)
            | Error::PointNotOnCurve
            | Error::DuplicateSquareClass(_)
    )
}

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

/// Every non-integral JSON number becomes a `[mantissa-hex, exponent, bits]` triple.
fn encode_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => float_triple(&n.as_f64().expect("f64")),
        Value::Array(a) => Value::Array(a.into_iter().map(encode_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, encode_floats(v))).collect()),
        other => other,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Twists { .. } => "twists",
        Command::FfTwists { .. } => "ff-twists",
        Command::Heegner { .. } => "heegner",
        Command::Classgroup { .. } => "classgroup",
        Command::Dihedral { .. } => "dihedral",
        Command::Orbit { .. } => "orbit",
    }
}

impl Report {
    pub fn new(argv: Vec<String>, outcome: Outcome, cmd: &Command, start: Instant, deterministic: bool) -> Self {
        let (status, outputs, error) = match outcome.result {
            Ok(o) => {
                let status = if o.verified { "ok" } else { "verification_failed" };
                (status.to_string(), encode_floats(o.value), None)
            }
            Err(e) => {
                let status = if is_usage_error(&e) { "usage_error" } else { "failed" };
                let err = json!({"kind": error_kind(&e), "message": e.to_string()});
                (status.to_string(), Value::Null, Some(err))
            }
        };
        let provenance = json!({
            "tool": "rankforge",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": command_name(cmd),
            "precision_bits": outcome.precision_bits,
            "float_format": "[mantissa-hex, binary exponent, precision bits]",
            "manin_constant_assumed": 1,
        });
        let timing = (!deterministic).then(|| {
            json!({
                "elapsed_ms": start.elapsed().as_millis() as u64,
                "threads": rayon::current_num_threads(),
            })
        });
        Report {
            command: argv,
            status,
            inputs: encode_floats(outcome.inputs),
            outputs,
            error,
            provenance,
            timing,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.status.as_str() {
            "ok" => 0,
            "usage_error" => 1,
            _ => 2,
        }
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_exit_codes() {
        let cmd = Command::Classgroup { d: -23 };
        let ok = Outcome {
            inputs: json!({"D": -23, "eps": 0.5}),
            result: Ok(Output {
                value: json!({"h": 3}),
                verified: true,
            }),
            precision_bits: None,
        };
        let r = Report::new(vec!["classgroup".into()], ok, &cmd, Instant::now(), true);
        assert_eq!(r.exit_code(), 0);
        assert!(r.timing.is_none());
        assert!(r.inputs["eps"].is_array());
        let back: Report = serde_json::from_str(&r.to_string_pretty()).unwrap();
        assert_eq!(back, r);

        let bad = Outcome {
            inputs: json!({}),
            result: Err(Error::Singular),
            precision_bits: None,
        };
        assert_eq!(Report::new(vec![], bad, &cmd, Instant::now(), true).exit_code(), 1);
        let failed = Outcome {
            inputs: json!({}),
            result: Err(Error::RecognitionFailed("x".into())),
            precision_bits: None,
        };
        let r = Report::new(vec![], failed, &cmd, Instant::now(), false);
        assert_eq!((r.status.as_str(), r.exit_code()), ("failed", 2));
        let unverified = Outcome {
            inputs: json!({}),
            result: Ok(Output {
                value: json!({}),
                verified: false,
            }),
            precision_bits: Some(128),
        };
        assert_eq!(Report::new(vec![], unverified, &cmd, Instant::now(), true).exit_code(), 2);
    }
}
