use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(name: &str) -> String {
    repo().join("data").join(name).to_string_lossy().into_owned()
}

fn alasso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alasso")).args(args).env_remove("ALASSO_THREADS").output().unwrap()
}

/// Runs a command that must succeed and checks its stdout against the
/// command's published schema.
fn run_valid(args: &[&str]) -> Value {
    let out = alasso(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    let command = value["command"].as_str().unwrap().to_string();
    let schema_path = repo().join("schemas").join(format!("{command}.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{command} output violates schema: {errors:?}");
    value
}

#[test]
fn bounds_for_the_hexagon_dimensions() {
    let v = run_valid(&["bounds", "--n", "2", "--p", "3"]);
    assert_eq!(v["payload"]["f_vector"]["counts"], serde_json::json!(["6", "6"]));
    assert_eq!(v["payload"]["naive_bound"], "19");
    assert_eq!(v["seed"], Value::Null);
}

#[test]
fn bounds_with_size_and_asymptotics() {
    let v = run_valid(&["bounds", "--n", "4", "--p", "5", "--k", "2"]);
    // f_1 of the cyclic 4-polytope with 10 vertices is C(10, 2)
    assert_eq!(v["payload"]["size_k_bound"]["bound"], "45");
    assert_eq!(v["payload"]["face_total"], "160");
    let v = run_valid(&["bounds", "--rho", "7", "--kappa", "0.6", "--n", "50", "--epsilon", "0.01"]);
    assert_eq!(v["payload"]["asymptotics"]["rho_threshold"].as_f64(), Some(6.0));
    assert!(v["payload"]["asymptotics"]["ball"].is_object());
    let v = run_valid(&["bounds", "--rho", "7", "--kappa", "0.6"]);
    let c = v["payload"]["asymptotics"]["growth_constant"].as_f64().unwrap();
    assert!(c < 1.0);
}

#[test]
fn enumerate_hexagon_finds_thirteen_models() {
    let v = run_valid(&["enumerate", "--design", &data("hexagon.csv")]);
    assert_eq!(v["payload"]["total"], 13);
    assert_eq!(v["payload"]["counts_by_size"], serde_json::json!([1, 6, 6]));
    assert_eq!(v["payload"]["models"].as_array().unwrap().len(), 13);
}

#[test]
fn check_face_reads_model_json() {
    let v = run_valid(&["check-face", "--design", &data("hexagon.csv"), "--model", &data("hexagon_model.json")]);
    assert_eq!(v["payload"]["is_face"], true);
    assert_eq!(v["config"]["model"]["signed"], serde_json::json!([[1, "+"], [3, "-"]]));

    let dir = tempfile::tempdir().unwrap();
    // 1+ and 3+ are not adjacent on the hexagon
    let model = dir.path().join("m.json");
    std::fs::write(&model, r#"{"p":3,"signed":[[1,"+"],[3,"+"]]}"#).unwrap();
    let v = run_valid(&["check-face", "--design", &data("hexagon.csv"), "--model", model.to_str().unwrap()]);
    assert_eq!(v["payload"]["is_face"], false);
    assert_eq!(v["payload"]["witness"], Value::Null);
}

#[test]
fn solve_path_and_project_report_consistent_results() {
    let design = data("random_4x6.csv");
    let response = data("random_4x6_response.csv");
    let v = run_valid(&["solve", "--design", &design, "--response", &response, "--lambda", "0.5"]);
    assert_eq!(v["payload"]["kkt"]["pass"], true);
    assert!(v["payload"]["support"]["signed"].as_array().unwrap().len() <= 4);

    let v = run_valid(&["path", "--design", &design, "--response", &response, "--grid-size", "15"]);
    let points = v["payload"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 15);
    assert!(points.iter().all(|p| p["kkt_pass"] == true));
    assert_eq!(points[0]["support"]["signed"], serde_json::json!([]));

    let v = run_valid(&["project", "--design", &design, "--response", &response, "--lambda", "0.3"]);
    assert_eq!(v["payload"]["identity_holds"], true);
}

#[test]
fn standardize_rescales_columns() {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("x.csv");
    std::fs::write(&design, "2,0\n0,3\n").unwrap();
    let response = dir.path().join("y.csv");
    std::fs::write(&response, "4\n0\n").unwrap();
    let (d, r) = (design.to_str().unwrap(), response.to_str().unwrap());
    let raw = run_valid(&["solve", "--design", d, "--response", r, "--lambda", "1"]);
    let scaled = run_valid(&["solve", "--design", d, "--response", r, "--lambda", "1", "--standardize"]);
    // b = (x^T y - lambda) / |x|^2: 7/4 for the raw column, 3 for the unit one
    let b_raw = raw["payload"]["coefficients"][0].as_f64().unwrap();
    let b_std = scaled["payload"]["coefficients"][0].as_f64().unwrap();
    assert!((b_raw - 1.75).abs() < 1e-9, "{b_raw}");
    assert!((b_std - 3.0).abs() < 1e-9, "{b_std}");
    assert_eq!(scaled["config"]["input"]["standardize"], true);
}

#[test]
fn omitted_seed_is_generated_and_reported() {
    let out = alasso(&["sample", "--design", &data("hexagon.csv"), "--samples", "500"]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let printed: u64 = stderr.lines().find_map(|l| l.strip_prefix("seed: ")).unwrap().trim().parse().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"].as_u64(), Some(printed));

    // the reported seed reproduces the run
    let again = run_valid(&["sample", "--design", &data("hexagon.csv"), "--samples", "500", "--seed", &printed.to_string()]);
    assert_eq!(again["payload"], v["payload"]);
}

#[test]
fn sample_output_matches_schema() {
    let v = run_valid(&["sample", "--design", &data("hexagon.csv"), "--samples", "3000", "--seed", "5"]);
    let total: u64 = v["payload"]["models"].as_array().unwrap().iter().map(|m| m["hits"].as_u64().unwrap()).sum();
    assert_eq!(total, 3000);
}

#[test]
fn simulate_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let summary = dir.path().join("s.json");
    let v = run_valid(&[
        "simulate", "--n", "30", "--p", "36", "--k", "4", "--reps", "6", "--seed", "3",
        "--out", csv.to_str().unwrap(), "--summary", summary.to_str().unwrap(), "--corr", "0.3",
    ]);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["payload"]["summary"]["completed"], 6);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("replicate,best_error,argmin_lambda"));
    assert_eq!(lines.count(), 6);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["summary"], v["payload"]["summary"]);
}

#[test]
fn simulate_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let csv = dir.path().join(format!("t{threads}.csv"));
        let out = alasso(&[
            "--threads", threads, "simulate", "--n", "100", "--p", "120", "--k", "60", "--reps", "200", "--seed", "7",
            "--out", csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 201);
}

#[test]
fn thread_count_comes_from_environment() {
    let design = data("hexagon.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_alasso"))
        .args(["sample", "--design", &design, "--samples", "2000", "--seed", "1"])
        .env("ALASSO_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let base = alasso(&["sample", "--design", &design, "--samples", "2000", "--seed", "1"]);
    assert_eq!(out.stdout, base.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_alasso"))
        .args(["bounds", "--n", "2", "--p", "3"])
        .env("ALASSO_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn path_demo_emits_error_series() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("demo.csv");
    let v = run_valid(&[
        "path-demo", "--n", "40", "--p", "48", "--k", "10", "--seed", "11", "--out", csv.to_str().unwrap(),
    ]);
    assert!(v["payload"].get("points").is_none());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("lambda,support_size,error"));
    assert_eq!(text.lines().count(), 1 + 480);
    // the first grid point is lambda_max, where the estimate is empty
    assert!(text.lines().nth(1).unwrap().ends_with(",0,1"));

    let v = run_valid(&["path-demo", "--n", "20", "--p", "24", "--k", "5", "--seed", "2"]);
    assert_eq!(v["payload"]["points"].as_array().unwrap().len(), 240);
}

#[test]
fn exit_codes_distinguish_usage_validation_and_runtime_errors() {
    let usage = alasso(&["solve", "--bogus"]);
    assert_eq!(usage.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("Usage"));

    let unknown = alasso(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));

    let validation = alasso(&["enumerate", "--design", &data("hexagon.csv"), "--lambda", "-1"]);
    assert_eq!(validation.status.code(), Some(2));
    assert!(validation.stdout.is_empty());

    let too_big = alasso(&["bounds", "--n", "5", "--p", "2"]);
    assert_eq!(too_big.status.code(), Some(2));

    let missing = alasso(&["enumerate", "--design", "/nonexistent/x.csv"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/x.csv"));
}
