//! End-to-end checks of the binary: exit codes, document outputs, and
//! rerun reproducibility.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mbqcqp");

const MIN_INSTANCE: &str = r#"{
  "field": "real", "model": "min", "epsilon": 0.3, "Q": 2,
  "matrices": [[[2.0, 0.1], [0.1, 1.0]],
               [[1.0, 0.0], [0.0, 0.5]],
               [[0.5, 0.2], [0.2, 2.0]]]
}"#;

/// Both suppression constraints share the null direction (0, 1).
const UNBOUNDED_MAX_INSTANCE: &str = r#"{
  "field": "real", "model": "max", "epsilon": 0.5, "Q": 1,
  "matrices": [[[1.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]
}"#;

const ZERO_EPS_MAX_INSTANCE: &str = r#"{
  "field": "real", "model": "max", "epsilon": 0.0, "Q": 1,
  "matrices": [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]]
}"#;

fn write_instance(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

#[test]
fn solve_emits_a_parsable_solution_document() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_instance(dir.path(), "inst.json", MIN_INSTANCE);
    let out = run(&["solve", "--instance", instance.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["which"], "Sdp2");
    assert_eq!(doc["status"], "optimal");
    assert!(doc["value"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["beta"].as_array().unwrap().len(), 3);
    assert!(doc["residuals"]["gap_rel"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn round_is_reproducible_and_feasible() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_instance(dir.path(), "inst.json", MIN_INSTANCE);
    let args =
        ["round", "--instance", instance.to_str().unwrap(), "--trials", "100", "--seed", "5"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(doc["feasible"], true);
    assert_eq!(doc["support"].as_array().unwrap().len(), 2);
    let ratio = doc["ratio"].as_f64().unwrap();
    assert!(ratio >= 1.0 - 1e-7, "ratio {ratio}");
}

#[test]
fn bound_writes_report_next_to_instance() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_instance(dir.path(), "inst.json", MIN_INSTANCE);
    let out = run(&["bound", "--instance", instance.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mu"), "{text}");
    let report_path = dir.path().join("inst.bound.json");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    assert!(doc["mu"].as_f64().unwrap() >= 1.0);
}

#[test]
fn zero_epsilon_max_bound_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_instance(dir.path(), "inst.json", ZERO_EPS_MAX_INSTANCE);
    let out = run(&["bound", "--instance", instance.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no approximation guarantee"));
}

#[test]
fn unbounded_model_exits_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_instance(dir.path(), "inst.json", UNBOUNDED_MAX_INSTANCE);
    let out = run(&["solve", "--instance", instance.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["oracle", "--instance", instance.to_str().unwrap(), "--grid", "512"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_instance_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_instance(dir.path(), "inst.json", "{\"field\": \"real\"");
    let out = run(&["solve", "--instance", instance.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_writes_records_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("exp");
    let args = [
        "experiment",
        "--M", "4", "--Q", "2", "--N", "3",
        "--field", "real", "--model", "min", "--eps", "0",
        "--realizations", "5", "--trials", "50",
        "--seed", "9",
        "--out", out_dir.to_str().unwrap(),
    ];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let csv = std::fs::read(out_dir.join("records.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&csv).lines().count(), 6);
    assert!(out_dir.join("summary.json").exists());
    assert!(out_dir.join("histogram.json").exists());
    let second = run(&args);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(std::fs::read(out_dir.join("records.csv")).unwrap(), csv);
}

#[test]
fn oracle_reports_value_for_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_instance(dir.path(), "inst.json", MIN_INSTANCE);
    let out = run(&["oracle", "--instance", instance.to_str().unwrap(), "--grid", "2048"]);
    assert_eq!(out.status.code(), Some(0));
    let report_path = dir.path().join("inst.oracle.json");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    assert!(doc["value"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["support"].as_array().unwrap().len(), 2);
}
