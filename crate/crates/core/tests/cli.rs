use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/specs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-exotic")).args(args).output().expect("binary runs")
}

fn write_spec(dir: &tempfile::TempDir, body: &str) -> String {
    let path = dir.path().join("spec.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn keys_sorted(v: &Value) -> bool {
    match v {
        Value::Object(map) => {
            let keys: Vec<&String> = map.keys().collect();
            keys.windows(2).all(|w| w[0] < w[1]) && map.values().all(keys_sorted)
        }
        Value::Array(items) => items.iter().all(keys_sorted),
        _ => true,
    }
}

#[test]
fn price_prints_one_json_report() {
    let spec = specs().join("forward_start_nig.json");
    let out = run(&["price", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).expect("stdout is exactly one JSON document");
    assert!(report["price"].as_f64().unwrap() > 0.0);
    assert!(report["error_estimate"].as_f64().is_some());
    assert_eq!(report["method"], "fourier");
    for key in ["dimensions", "evaluations", "offsets"] {
        assert!(report["diagnostics"].get(key).is_some(), "missing {key}");
    }
    assert!(keys_sorted(&report));
}

#[test]
fn flags_override_the_spec() {
    let spec = specs().join("digital_nig.json");
    let out = run(&["price", "--spec", spec.to_str().unwrap(), "--method", "mc", "--paths", "20000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["method"], "mc");
    assert_eq!(report["diagnostics"]["paths"], 20000);
    assert_eq!(report["diagnostics"]["seed"], 7);
    assert!(report["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn cgmy_has_no_sampler() {
    let spec = specs().join("compound_cgmy.json");
    let out = run(&["price", "--spec", spec.to_str().unwrap(), "--method", "mc"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("UnsupportedModel"));
}

#[test]
fn malformed_specs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        "{ not json",
        r#"{"model": {"kind": "gaussian", "params": {"sigma": 0.2}, "r": 0.05}, "spot": 100.0}"#,
        r#"{"model": {"kind": "gaussian", "params": {"sigma": -0.2}, "r": 0.05}, "spot": 100.0,
            "contract": {"type": "forward_start", "t1": 0.5, "t2": 1.0, "w": 1.0}}"#,
    ] {
        let out = run(&["price", "--spec", &write_spec(&dir, body)]);
        assert_eq!(out.status.code(), Some(2), "{body}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let missing = run(&["price", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"model": {"kind": "nig", "params": {"alpha": 8.0, "delta": 0.3}, "r": 0.05}, "spot": 100.0,
        "contract": {"type": "forward_start", "t1": 0.5, "t2": 1.0, "w": 1.0}}"#;
    let out = run(&["price", "--spec", &write_spec(&dir, body)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn pricing_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // the power e^{5X} has no moment under this strip
    let body = r#"{"model": {"kind": "nig", "params": {"alpha": 3.0, "beta": 1.5, "delta": 0.3}, "r": 0.05}, "spot": 100.0,
        "contract": {"type": "digital", "schedule": {"t": 0.0, "dates": [1.0]},
                     "payoff": {"gamma": [5.0], "k_log": [4.6], "w": [1.0], "a": [[1.0]]}}}"#;
    let out = run(&["price", "--spec", &write_spec(&dir, body)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
}

#[test]
fn grid_convergence_is_csv() {
    let spec = specs().join("digital_gaussian.json");
    let out = run(&["convergence", "--spec", spec.to_str().unwrap(), "--axis", "grid"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("resolution,price,error,wall_time_ms"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 4);
    assert!(rows.iter().all(|r| r.len() == 4));
    assert!(rows.last().unwrap()[2] < rows[0][2]);
}

#[test]
fn validate_reports_a_summary() {
    let out = run(&["validate", "asian-limit"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["suite"], "asian-limit");
    assert_eq!(report["cases"], report["passed"]);
    assert!(keys_sorted(&report));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(run(&["validate", "everything"]).status.code(), Some(2));
}
