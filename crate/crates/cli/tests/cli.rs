use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn convexop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convexop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn body_gen_apply_and_measure() {
    let dir = tempfile::tempdir().unwrap();
    let o = convexop(&["body", "gen", "--corpus", "simplex", "--n", "2", "--count", "1", "--out", path(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let simplex = dir.path().join("body_0000.json");
    let doc: Value = serde_json::from_str(&fs::read_to_string(&simplex).unwrap()).unwrap();
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 3);

    let hexagon = dir.path().join("d.json");
    let o = convexop(&["op", "apply", "--op", "difference", "--body", path(&simplex), "--out", path(&hexagon)]);
    assert!(o.status.success());
    let o = convexop(&["measure", "--body", path(&hexagon), "--what", "volume"]);
    assert!(o.status.success());
    let m: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((m["volume"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn body_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let o = convexop(&["body", "gen", "--corpus", "random_gauss_hull:9", "--n", "3", "--seed", "4", "--count", "2"]);
    assert!(o.status.success());
    let first = stdout(&o).lines().next().unwrap().to_string() + "\n";
    let src = dir.path().join("k.json");
    fs::write(&src, &first).unwrap();
    let o = convexop(&["op", "apply", "--op", "difference:1", "--body", path(&src)]);
    assert!(o.status.success());
    let o2 = convexop(&["op", "apply", "--op", "linear:1,1", "--body", path(&src)]);
    assert_eq!(stdout(&o), stdout(&o2));
}

#[test]
fn failing_check_writes_a_witness_that_revalidates() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("gl.json");
    let o = convexop(&[
        "check", "--op", "volume-scaled-d", "--property", "GLCovariance", "--n", "2", "--trials", "10", "--seed", "3",
        "--out", path(&report),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("verdict=fail"));
    assert!(dir.path().join("gl.csv").exists());
    let o = convexop(&["check", "--revalidate", path(&report)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("violation reproduced"));
}

#[test]
fn check_reports_continuity_evidence() {
    let o = convexop(&["check", "--op", "dim-gated-d", "--property", "lipschitz", "--n", "2", "--trials", "10"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("continuity evidence: violated"));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = convexop(&["sweep", "--op", "difference", "--property", "RS", "--n", "2", "--trials", "50", "--out", path(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.lines().count() >= 2);
    assert!(text.lines().nth(1).unwrap().starts_with("2,"));
}

#[test]
fn experiment_from_toml() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        r#"
name = "small"
seed = 5
trials = 20
dims = [2]

[[groups]]
label = "difference body"
operators = ["difference"]
properties = ["GLCovariance", "OSymmetrization"]
expect = "pass"

[[groups]]
label = "hull with origin"
operators = ["hull-origin"]
properties = ["TranslationInvariance"]
expect = "fail"
"#,
    )
    .unwrap();
    let out = dir.path().join("bundle");
    let o = convexop(&["experiment", "--config", path(&config), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "operator,property,n,trials,verdict,empirical_constant,witness_path");
    assert_eq!(csv.lines().count(), 4);
    assert!(out.join("summary.md").exists());

    let again = dir.path().join("again");
    convexop(&["experiment", "--config", path(&config), "--out", path(&again)]);
    assert_eq!(csv, fs::read_to_string(again.join("summary.csv")).unwrap());
}

#[test]
fn experiment_mismatch_sets_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    fs::write(
        &config,
        r#"{"name": "wrong", "dims": [2], "trials": 10,
            "groups": [{"label": "x", "operators": ["hull-origin"], "properties": ["OSymmetrization"], "expect": "pass"}]}"#,
    )
    .unwrap();
    let o = convexop(&["experiment", "--config", path(&config), "--out", path(&dir.path().join("b"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    fs::write(&config, r#"{"name": "n5", "dims": [5], "groups": [{"operators": ["difference"], "properties": ["RS"]}]}"#).unwrap();
    let out = dir.path().join("b");
    let o = convexop(&["experiment", "--config", path(&config), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).to_lowercase().contains("dimension"));
    assert!(!out.join("summary.csv").exists());

    let o = convexop(&["check", "--op", "nonsense", "--property", "RS"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn default_config_is_printable() {
    let o = convexop(&["experiment", "--print-default"]);
    assert!(o.status.success());
    let cfg: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(cfg["groups"].as_array().unwrap().len() >= 10);
}
