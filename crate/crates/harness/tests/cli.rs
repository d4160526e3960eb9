use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn covham(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covham")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn report_body(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn bundled_scenarios_validate() {
    for entry in std::fs::read_dir(scenario("")).unwrap() {
        let path = entry.unwrap().path();
        let out = covham(&["validate", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn invalid_em_mass_is_reported_by_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{ "field": { "kind": "em", "c": 1.0, "b2": 0.5 },
             "grid": { "kmax": 2.0, "n_per_axis": 4 },
             "time": { "x0_start": 0.0, "x0_end": 1.0, "steps": 10 } }"#,
    )
    .unwrap();
    let out = covham(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field.b2"));
}

#[test]
fn missing_file_fails_cleanly() {
    let out = covham(&["run", "/nonexistent/scenario.json", "--suite", "parseval"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn same_seed_gives_identical_report_body() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let sc = scenario("free_scalar.json");
    for dir in [&a, &b] {
        let out = covham(&[
            "run",
            sc.to_str().unwrap(),
            "--suite",
            "bracket",
            "--seed",
            "7",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let body = report_body(a.path());
    assert_eq!(body, report_body(b.path()));
    assert_eq!(body["reproducibility"]["seed"], 7);
    assert_eq!(body["suite"], "bracket");
    assert!(body["records"].as_array().unwrap().iter().all(|r| r["status"] == "pass"));
}

#[test]
fn tolerance_override_turns_a_pass_into_a_failing_exit() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("free_scalar.json");
    let out = covham(&[
        "run",
        sc.to_str().unwrap(),
        "--suite",
        "parseval",
        "--tol",
        "parseval=0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let body = report_body(dir.path());
    assert_eq!(body["tolerances"]["parseval"], 0.0);
    let rec = body["records"].as_array().unwrap().iter().find(|r| r["name"] == "parseval.relative_error").unwrap();
    assert_eq!(rec["status"], "fail");
}

#[test]
fn unknown_tolerance_name_is_rejected() {
    let out = covham(&["run", scenario("free_scalar.json").to_str().unwrap(), "--tol", "nonsense=1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_format_writes_records_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = covham(&[
        "run",
        scenario("free_scalar.json").to_str().unwrap(),
        "--suite",
        "simulate",
        "--format",
        "csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(!dir.path().join("report.json").exists());
    let records = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert!(records.lines().next().unwrap().starts_with("name,status,measured,tolerance"));
    assert!(records.contains("simulate.causality"));
    assert!(dir.path().join("amplitude_history.csv").exists());
}
