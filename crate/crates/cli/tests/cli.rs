use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ipm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

struct Fixture {
    dir: TempDir,
    co: PathBuf,
    ind: PathBuf,
    id: PathBuf,
}

fn fixture() -> Fixture {
    let dir = TempDir::new().unwrap();
    let co = write(dir.path(), "co.json", r#"{"dim": 2, "atoms": [[0, 0], [1, 1]]}"#);
    let ind = write(dir.path(), "ind.csv", "y,z,weight\n0,0,0.25\n0,1,0.25\n1,0,0.25\n1,1,0.25\n");
    let id = write(dir.path(), "id.json", r#""identity""#);
    Fixture { dir, co, ind, id }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn metrics_bernoulli_pair() {
    let f = fixture();
    let out = ipm(&["metrics", s(&f.co), s(&f.ind), "--p", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_out(&out);
    assert_eq!(num(&v, "m1"), 0.25);
    assert!((num(&v, "bl1") - 1.0 / 3.0).abs() < 1e-9);
    assert!((num(&v, "c0") - 1.0 / 3.0).abs() < 1e-9);
    assert_eq!(num(&v, "theorem2_bound"), 1.0);
    assert_eq!(v["marginals_common"], Value::Bool(true));
    assert_eq!(v["config"]["p"].as_f64(), Some(1.0));
    // 17 significant digits in the raw text
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("3.3333333333333331e-1"), "{text}");
}

#[test]
fn metrics_same_file_is_zero() {
    let f = fixture();
    let out = ipm(&["metrics", s(&f.co), s(&f.co), "--p", "inf"]);
    assert!(out.status.success());
    let v = json_out(&out);
    for key in ["m1", "bl1", "survival_sup", "theorem2_bound"] {
        assert_eq!(num(&v, key), 0.0, "{key}");
    }
    assert_eq!(v["config"]["p"], Value::String("inf".into()));
}

#[test]
fn metrics_different_marginals_flagged() {
    let f = fixture();
    let shifted = write(f.dir.path(), "shift.json", r#"{"dim": 2, "atoms": [[0, 0], [2, 1]]}"#);
    let out = ipm(&["metrics", s(&f.co), s(&shifted)]);
    assert!(out.status.success());
    let v = json_out(&out);
    assert_eq!(v["marginals_common"], Value::Bool(false));
    assert!(v["m1"].is_null());
    assert!(num(&v, "survival_sup") > 0.0);
}

#[test]
fn malformed_input_exits_2() {
    let f = fixture();
    let bad = write(f.dir.path(), "bad.json", "{\"dim\": 2, \"atoms\": ");
    let out = ipm(&["metrics", s(&bad), s(&f.co)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let out = ipm(&["metrics", s(&f.co), s(&f.ind), "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ipm(&["verify-cor1", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dimension_mismatch_fails() {
    let f = fixture();
    let one = write(f.dir.path(), "one.json", r#"{"dim": 1, "atoms": [[0], [1]]}"#);
    let out = ipm(&["metrics", s(&f.co), s(&one)]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn cov_bounds_report() {
    let f = fixture();
    let out_path = f.dir.path().join("cov.json");
    let out = ipm(&["cov-bounds", s(&f.co), s(&f.id), s(&f.id), "--out", s(&out_path)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(num(&v, "cov"), 0.25);
    assert_eq!(num(&v, "alpha"), 0.5);
    assert_eq!(num(&v, "rio_bound"), 1.0);
    assert_eq!(num(&v, "cor2_bound"), 1.0);
    assert_eq!(num(&v, "theta"), 2.0);
    assert!((num(&v, "d_bl") - 1.0 / 3.0).abs() < 1e-9);

    let out = ipm(&["cov-bounds", s(&f.ind), s(&f.id), s(&f.id)]);
    let v = json_out(&out);
    assert_eq!((num(&v, "cov"), num(&v, "alpha"), num(&v, "rio_bound")), (0.0, 0.0, 0.0));

    let three = write(f.dir.path(), "three.json", r#"{"dim": 3, "atoms": [[0, 0, 0]]}"#);
    let out = ipm(&["cov-bounds", s(&three), s(&f.id), s(&f.id)]);
    assert!(!out.status.success());
}

#[test]
fn verify_suites_pass_and_echo_config() {
    let out = ipm(&["verify-theorem2", "--trials", "40", "--k", "2", "--n", "6", "--p", "1", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json_out(&out);
    assert_eq!(v["result"]["passes"].as_u64(), Some(40));
    assert_eq!(v["config"]["seed"].as_u64(), Some(5));
    assert_eq!(v["config"]["trials"].as_u64(), Some(40));

    let out = ipm(&["verify-cor1", "--trials", "30"]);
    assert!(out.status.success());
    assert_eq!(json_out(&out)["result"]["passes"].as_u64(), Some(30));

    let out = ipm(&["lp-selftest", "--trials", "30"]);
    assert!(out.status.success());
    assert_eq!(json_out(&out)["passed"], Value::Bool(true));
}

#[test]
fn verify_theorem2_fails_at_small_scale() {
    let out = ipm(&["verify-theorem2", "--trials", "40", "--k", "2", "--p", "1", "--scale", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_out(&out);
    assert_eq!(v["passed"], Value::Bool(false));
    assert!(v["result"]["passes"].as_u64().unwrap() < 40);
}

#[test]
fn linear_process_csv() {
    let out = ipm(&["linear-process", "--rho", "0.5", "--lags", "1,5", "--samples", "500", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,coupling_bound_emp,coupling_bound_se,analytic_bound,survival_sup,theorem2_of_coupling")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], 5.0);
    assert!((rows[1][3] - 0.0997356).abs() < 1e-6);

    let again = ipm(&["linear-process", "--rho", "0.5", "--lags", "1,5", "--samples", "500", "--seed", "3"]);
    assert_eq!(text.as_bytes(), &again.stdout[..]);

    let out = ipm(&["linear-process", "--coeffs", "1,0.5", "--lags", "3", "--samples", "10"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("3,0.0000000000000000e0"));

    let out = ipm(&["linear-process", "--innovation", "cauchy"]);
    assert_eq!(out.status.code(), Some(2));
}
