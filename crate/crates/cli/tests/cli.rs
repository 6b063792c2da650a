use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use stosched_cli::{emit_instance, exit, parse_instance};
use stosched_core::generate::{random_instance, GenConfig};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn stosched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stosched")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = stosched(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn field<'a>(report: &'a Value, name: &str) -> &'a str {
    report["summary"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["name"] == name)
        .and_then(|f| f["value"].as_str())
        .unwrap_or_else(|| panic!("no field {name}"))
}

#[test]
fn list_on_worked_instance() {
    let worked = data("worked.json");
    let r = json(&["list", worked.to_str().unwrap()]);
    assert_eq!(field(&r, "alg"), "4");
    assert_eq!(field(&r, "alpha_sum"), "4");
    assert_eq!(field(&r, "dual_objective"), "1");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn lowerbound_two() {
    let r = json(&["lowerbound", "2"]);
    assert_eq!(field(&r, "greedy"), "11");
    assert_eq!(field(&r, "opt"), "6");
    assert_eq!(field(&r, "ratio"), "11/6");
    assert_eq!(field(&r, "ratio_decimal"), "1.833333");
}

#[test]
fn lp_on_unit_job() {
    let unit = data("unit.json");
    let r = json(&["lp", "--variant", "P", unit.to_str().unwrap()]);
    assert_eq!(field(&r, "optimum"), "1");
}

#[test]
fn lp_export_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("model.lp");
    let inst = data("stochastic.json");
    let r = json(&["lp", "--variant", "So", inst.to_str().unwrap(), "--export", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let model = stosched_core::lp::parse_lp(&text).unwrap();
    assert_eq!(model.vars.len().to_string(), field(&r, "variables"));
    assert_eq!(model.constraints.len().to_string(), field(&r, "constraints"));
}

#[test]
fn reports_are_byte_identical_for_equal_seeds() {
    let inst = data("stochastic.json");
    let args = ["time", inst.to_str().unwrap(), "--samples", "3000", "--seed", "17", "--format", "csv"];
    let a = stosched(&args);
    let b = stosched(&args);
    let single = Command::new(env!("CARGO_BIN_EXE_stosched"))
        .args(args)
        .env("SCHED_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, single.stdout);
    let other = stosched(&["time", inst.to_str().unwrap(), "--samples", "3000", "--seed", "18", "--format", "csv"]);
    assert_ne!(a.stdout, other.stdout);
    for cmd in ["verify", "oracle", "list"] {
        let x = stosched(&[cmd, inst.to_str().unwrap(), "--samples", "500"]);
        let y = stosched(&[cmd, inst.to_str().unwrap(), "--samples", "500"]);
        assert_eq!(x.stdout, y.stdout, "{cmd}");
    }
}

#[test]
fn time_report_has_per_job_rows() {
    let inst = data("stochastic.json");
    let r = json(&["time", inst.to_str().unwrap(), "--samples", "2000"]);
    assert_eq!(r["tables"][0]["rows"].as_array().unwrap().len(), 3);
    let r = json(&["time", inst.to_str().unwrap(), "--samples", "2000", "--mode", "max-proc"]);
    assert_eq!(field(&r, "mode"), "max-proc");
}

#[test]
fn appendix_passes() {
    let out = stosched(&["appendix", "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(exit::OK as i32));
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("all checks passed\n"));
}

fn code(args: &[&str]) -> i32 {
    stosched(args).status.code().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let worked = data("worked.json");
    let worked = worked.to_str().unwrap();
    assert_eq!(code(&["list", worked]), exit::OK as i32);
    assert_eq!(code(&["list", "/nonexistent/instance.json"]), exit::IO as i32);
    assert_eq!(code(&["list", &write("bad.json", "{\"machines\": 1,")]), exit::SCHEMA as i32);
    let probs = write("probs.json", r#"{"machines": 1, "jobs": [{"w": "1", "r": 0, "proc": [[[1, "1/2"], [2, "2/5"]]]}]}"#);
    assert_eq!(code(&["list", &probs]), exit::SCHEMA as i32);
    let nowhere = write("nowhere.json", r#"{"machines": 1, "jobs": [{"w": "1", "r": 0, "proc": [null]}]}"#);
    assert_eq!(code(&["list", &nowhere]), exit::INVALID_INSTANCE as i32);
    assert_eq!(code(&["verify", worked, "--f", "3/2"]), exit::USAGE as i32);
    assert_eq!(code(&["time", worked, "--f", "1/2"]), exit::USAGE as i32);
    assert_eq!(code(&["time", worked, "--samples", "0"]), exit::USAGE as i32);
    assert_eq!(code(&["list", worked, "--format", "xml"]), exit::USAGE as i32);
    assert_eq!(code(&["lp", worked, "--horizon", "1"]), exit::COMPUTATION as i32);
    assert_eq!(code(&["lowerbound", "9"]), exit::COMPUTATION as i32);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn instances_round_trip(seed in any::<u64>()) {
        let cfg = GenConfig::small().with_releases(5);
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        let text = emit_instance(&inst);
        prop_assert_eq!(parse_instance(&text).unwrap(), inst);
    }
}
