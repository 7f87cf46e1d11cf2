use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn dyncu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyncu"))
        .args(args)
        .env_remove("DYNCU_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_cuntz() {
    let out = dyncu(&["analyze", model("cuntz2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["outcome"]["kind"], "PurelyInfinite");
    assert_eq!(v["outcome"]["witness"].as_array().map(Vec::len), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("PurelyInfinite"));
}

#[test]
fn analyze_is_deterministic() {
    let path = model("cycle3.json");
    let a = dyncu(&["analyze", path.to_str().unwrap()]);
    let b = dyncu(&["analyze", path.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["outcome"]["kind"], "StablyFinite");
}

#[test]
fn compare_reports_orbit_mass() {
    let out = dyncu(&["compare", model("z3.json").to_str().unwrap(), "[2,0,0]", "[0,1,0]"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["decision"]["outcome"], "No");
    assert_eq!(v["decision"]["certificate"]["kind"], "orbit_mass");
}

#[test]
fn compare_finds_a_witness() {
    let out = dyncu(&["compare", model("z3.json").to_str().unwrap(), "[1,0,0]", "[0,0,1]"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["decision"]["outcome"], "Yes");
}

#[test]
fn state_infeasible_on_cuntz() {
    let out = dyncu(&["state", model("cuntz2.json").to_str().unwrap(), "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["outcome"], "Infeasible");
}

#[test]
fn budget_flag_overrides_model() {
    let out = dyncu(&["--budget", "depth=1,len=2", "analyze", model("cycle1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let budget = json(&out)["budget"].as_str().unwrap().to_string();
    assert!(budget.contains("depth=1") && budget.contains("len=2"), "{budget}");
}

#[test]
fn orbits_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("z4.dot");
    let out = dyncu(&["orbits", model("z4.json").to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["orbits"].as_array().map(Vec::len), Some(1));
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("digraph"));
}

#[test]
fn malformed_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ \"schema\": 1, ").unwrap();
    let out = dyncu(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    std::fs::write(&path, r#"{"schema": 1, "space": {"type": "finite", "points": ["a"]}, "generators": [], "extra": 0}"#).unwrap();
    let out = dyncu(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extra"));
}

#[test]
fn bad_function_exits_2() {
    let out = dyncu(&["compare", model("z3.json").to_str().unwrap(), "[1,0]", "[0,0,1]"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dyncu(&["paradox", model("z3.json").to_str().unwrap(), "[1,1,1]", "1", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_and_bad_budget_exit_2() {
    assert_eq!(dyncu(&["analyze", "/nonexistent/model.json"]).status.code(), Some(2));
    let out = dyncu(&["--budget", "depth=x", "analyze", model("z2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
