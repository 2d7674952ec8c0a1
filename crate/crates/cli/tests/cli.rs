use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankforge"))
        .args(args)
        .env_remove("RANKFORGE_PREC_BITS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON report")
}

const E37: &str = "[0,0,1,-1,0]";

#[test]
fn classgroup_of_minus_23() {
    let out = run(&["classgroup", "-D", "-23"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["outputs"]["h"], 3);
    assert_eq!(r["outputs"]["structure"], serde_json::json!([3]));
    assert_eq!(r["provenance"]["subcommand"], "classgroup");
    assert!(r["timing"]["elapsed_ms"].is_u64());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["classgroup", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["twists", "--help"]).status.code(), Some(0));
}

#[test]
fn zero_count_is_rejected() {
    let out = run(&["twists", "--curve", E37, "--conductor-primes", "37", "--count", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "usage_error");
    assert_eq!(r["error"]["kind"], "Precondition");
    assert!(r["outputs"].is_null());
}

#[test]
fn zero_jobs_is_rejected() {
    assert_eq!(run(&["--jobs", "0", "classgroup", "-D", "-23"]).status.code(), Some(1));
}

#[test]
fn twists_on_37a() {
    let out = run(&["--deterministic", "twists", "--curve", E37, "--conductor-primes", "37", "--count", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let pts = r["outputs"]["certificate"]["points"].as_array().unwrap();
    let ms: Vec<&str> = pts.iter().map(|p| p["candidate"]["m"].as_str().unwrap()).collect();
    assert_eq!(ms, ["-164", "-165", "-166"]);
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let args = ["--deterministic", "ff-twists", "--q", "3", "--curve", r#"["T","1","T"]"#, "--conductor-primes", "T"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(report(&a).get("timing").is_none());
}

#[test]
fn report_round_trips_and_out_file_matches() {
    let dir = std::env::temp_dir().join(format!("rankforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&["--deterministic", "--out", path.to_str().unwrap(), "classgroup", "-D", "-84"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let again: Value = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(again, r);
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn heegner_37a_with_generator() {
    let out = run(&[
        "heegner", "--curve", E37, "--conductor-primes", "37", "--disc", "-7", "--bad-ap", "auto",
        "--generator", "[0,0]",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["outputs"]["point"], serde_json::json!(["0", "0"]));
    assert_eq!(r["outputs"]["ratio_square_root"], 1);
    // floats are exact triples, never decimal numbers
    assert!(r["outputs"]["height"].is_array());
    assert_eq!(r["provenance"]["precision_bits"], 128);
}

#[test]
fn precision_env_var_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_rankforge"))
        .args(["heegner", "--curve", E37, "--conductor-primes", "37", "--disc", "-7", "--bad-ap", "auto"])
        .env("RANKFORGE_PREC_BITS", "160")
        .output()
        .unwrap();
    assert_eq!(report(&out)["provenance"]["precision_bits"], 160);
}

#[test]
fn dihedral_odd_and_even() {
    let r = report(&run(&["dihedral", "--from-classgroup", "-D", "-23"]));
    assert_eq!(r["status"], "ok");
    assert_eq!(r["outputs"]["G"]["order"], 6);
    assert_eq!(r["outputs"]["minus_one"]["all_fix_module"], true);
    let out = run(&["dihedral", "--factors", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["outputs"]["minus_one"]["applicable"], false);
}

#[test]
fn orbit_defaults_to_smallest_split_prime() {
    let out = run(&["orbit", "--curve", E37, "--conductor-primes", "37", "--disc", "-7", "--bad-ap", "auto", "--n-max", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["outputs"]["p"], 11);
    assert!(r["inputs"]["tolerance"].is_array());
}

#[test]
fn bad_curve_is_a_usage_error() {
    let out = run(&["twists", "--curve", "[0,0,0,0,0]", "--conductor-primes", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["error"]["kind"], "Singular");
}

#[test]
fn failed_computation_exits_two() {
    // with a_37 forced to 0 the trace is not a rational point at any precision tried
    let out = run(&["heegner", "--curve", E37, "--conductor-primes", "37", "--disc", "-7", "--max-prec", "256"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"], "failed");
    assert_eq!(r["error"]["kind"], "RecognitionFailed");
}
