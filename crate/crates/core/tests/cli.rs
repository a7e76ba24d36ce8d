use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use costboost::attainability::{AttainabilityVerdict, MultiCost};
use costboost::games::CostMatrix;
use costboost::learners::{Hypothesis, Instance};

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_costboost")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

fn fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "zero_one2.json", r#"{"k":2,"entries":[[0,1],[1,0]]}"#);
    write(dir.path(), "zero_one3.json", r#"{"k":3,"entries":[[0,1,1],[1,0,1],[1,1,0]]}"#);
    write(dir.path(), "skewed.json", r#"{"k":2,"entries":[[0,0.25],[1,0]]}"#);
    dir
}

#[test]
fn game_value_golden_lines() {
    let dir = fixtures();
    let o = bin(&["game-value", "--cost", "zero_one2.json"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("0.500000000"));
    let o = bin(&["game-value", "--cost", "zero_one2.json", "--subset", "1"], dir.path());
    assert_eq!(stdout(&o).lines().next(), Some("0.000000000"));
    let o = bin(&["game-value", "--cost", "skewed.json", "--oracle"], dir.path());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("0.200000000"));
    assert!(out.contains("oracle: 0.200"));
}

#[test]
fn thresholds_print_the_ladder() {
    let dir = fixtures();
    let o = bin(&["thresholds", "--cost", "zero_one3.json"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["levels"], serde_json::json!([0.0, 0.5, 0.666666667]));
}

#[test]
fn exit_codes() {
    let dir = fixtures();
    write(dir.path(), "broken.json", "{");
    assert_eq!(bin(&["game-value", "--cost", "broken.json"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["game-value", "--cost", "zero_one2.json", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["game-value", "--cost", "zero_one2.json", "--subset", "3"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["boost-binary", "--cost", "skewed.json", "--z", "0.1"], dir.path()).status.code(), Some(2));

    let o = bin(&["boost-binary", "--cost", "skewed.json", "--z", "0.2", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("0.200000000"), "{err}");
}

#[test]
fn attainability_and_order() {
    let dir = fixtures();
    let o = bin(&["attainable", "--population-driven", "--z", "0.25,0.25", "--out", "verdict.json"], dir.path());
    assert_eq!(stdout(&o).trim(), "attainable");
    let verdict: AttainabilityVerdict =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert!(verdict.attainable);

    let o = bin(&["attainable", "--population-driven", "--z", "0.2,0.2"], dir.path());
    assert!(stdout(&o).starts_with("not attainable"));

    let o = bin(&["precedes", "--population-driven", "--z", "0.2,0.2", "--z-prime", "0.3,0.3"], dir.path());
    assert_eq!(stdout(&o).trim(), "precedes");
}

#[test]
fn boosting_artifacts_round_trip() {
    let dir = fixtures();
    let o = bin(
        &[
            "boost-binary", "--cost", "skewed.json", "--z", "0.1", "--seed", "3", "--domain", "30", "--sample", "300",
            "--out", "bb.json", "--save-instance", "inst.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("bb.json")).unwrap()).unwrap();
    let h: Hypothesis = serde_json::from_value(report["hypothesis"].clone()).unwrap();
    assert!(matches!(h, Hypothesis::Deterministic(_)));
    let _: CostMatrix = serde_json::from_value(report["cost"].clone()).unwrap();
    Instance::load(dir.path().join("inst.json")).unwrap();

    let o = bin(
        &["boost-binary", "--cost", "skewed.json", "--z", "0.1", "--seed", "4", "--instance", "inst.json", "--sample", "300"],
        dir.path(),
    );
    assert!(o.status.success());

    let o = bin(
        &["boost-list", "--cost", "zero_one3.json", "--z", "0.55", "--seed", "2", "--domain", "20", "--sample", "200"],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("max list size: 2"));

    let o = bin(
        &[
            "boost-mo", "--population-driven", "--z", "0.1,0.4", "--seed", "5", "--domain", "40", "--sample", "400",
            "--out", "mo.json",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("mo.json")).unwrap()).unwrap();
    let costs: MultiCost = serde_json::from_value(report["costs"].clone()).unwrap();
    fs::write(dir.path().join("costs.json"), serde_json::to_string(&costs).unwrap()).unwrap();
    let o = bin(&["attainable", "--costs", "costs.json", "--z", "0.25,0.25"], dir.path());
    assert_eq!(stdout(&o).trim(), "attainable");
}

#[test]
fn experiment_writes_a_run_directory() {
    let dir = fixtures();
    write(
        dir.path(),
        "dichotomy.json",
        r#"{"id":"sweep","seed":7,"experiment":{"kind":"dichotomy","cost":{"type":"file","path":"skewed.json"},
            "z_values":[0.1,0.2,0.3],"domain_size":30,"sample_size":400}}"#,
    );
    let o = bin(&["experiment", "--config", "dichotomy.json", "--output-dir", "runs"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("runs/sweep-seed7");
    for f in ["report.json", "cells.csv", "oracles.csv"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    let csv = fs::read_to_string(run.join("cells.csv")).unwrap();
    assert!(csv.starts_with("z,margin,outcome"));
    assert!(csv.contains("0.100000000,0.100000000,boosted"));
    assert!(csv.contains("0.200000000,0.000000000,trivial"));
}
