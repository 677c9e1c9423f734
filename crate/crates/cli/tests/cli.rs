use std::fs;
use std::path::Path;
use std::process::Command;

use frametk_cli::{emit_fixtures, run, ExperimentConfig, RunReport};
use serde_json::Value;

fn config(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    ExperimentConfig::load(&path).unwrap()
}

fn without_timing(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn density_command_reports_example_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config("density_example_maps.json"), dir.path()).unwrap();
    let ratios: Vec<&str> = report.results["maps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["ratio"].as_str().unwrap())
        .collect();
    assert_eq!(ratios, ["1/2", "1/2", "3/4"]);
    assert!(report.pass);
    assert!(dir.path().join("density_ratios.csv").exists());
}

#[test]
fn select_on_orthonormal_keeps_everything() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config("select_orthonormal.json"), dir.path()).unwrap();
    assert_eq!(report.results["selected"].as_array().unwrap().len(), 16);
    assert!(report.pass);
}

#[test]
fn gabor_command_passes_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config("gabor_half_lattice.json"), dir.path()).unwrap();
    assert!(report.pass, "{:#?}", report.checks);
    assert!(report.results["achieved_lower"].as_f64().unwrap() > 0.0);
}

#[test]
fn reports_are_reproducible_apart_from_timing() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("localize_banded.json");
    run(&cfg, a.path()).unwrap();
    run(&cfg, b.path()).unwrap();
    assert_eq!(without_timing(&a.path().join("report.json")), without_timing(&b.path().join("report.json")));
    for f in ["envelope.csv", "tail_norms.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn verify_command_rechecks_a_saved_selection() {
    let dir = tempfile::tempdir().unwrap();
    let sel = dir.path().join("select");
    let mut cfg = config("select_orthonormal.json");
    cfg.command = serde_json::from_str(r#"{"select": {"input": {"kind": "random", "n": 10, "m": 6}, "epsilon": 0.4}}"#).unwrap();
    assert!(run(&cfg, &sel).unwrap().pass);
    let verify = ExperimentConfig::parse(&format!(
        r#"{{"command": {{"verify": {{"selection": "{}", "family": "{}", "epsilon": 0.4}}}}}}"#,
        sel.join("selection.json").display(),
        sel.join("family.json").display()
    ))
    .unwrap();
    let report: RunReport = run(&verify, &dir.path().join("verify")).unwrap();
    assert!(report.pass);
    assert!(report.checks.iter().any(|c| c.name == "riesz_lower"));
}

#[test]
fn schema_errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"command": {"select": {"input": {"kind": "orthonormal", "n": 4}, "epsilon": 0.5, "typo": 1}}}"#).unwrap();
    let err = ExperimentConfig::load(&path).unwrap_err().to_string();
    assert!(err.contains("bad.json") && err.contains("typo"), "{err}");
    let err = ExperimentConfig::parse(r#"{"command": {"gabor": {"n": 64, "epsilon": 1.5, "delta": 0.5}}}"#).unwrap_err();
    assert!(err.to_string().contains("epsilon"));
}

#[test]
fn exit_status_reflects_outcome() {
    let bin = env!("CARGO_BIN_EXE_frametk");
    let dir = tempfile::tempdir().unwrap();
    let good = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/select_orthonormal.json");
    let st = Command::new(bin).arg("--config").arg(&good).arg("--out").arg(dir.path()).output().unwrap().status;
    assert_eq!(st.code(), Some(0));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{").unwrap();
    let st = Command::new(bin).arg("--config").arg(&bad).arg("--out").arg(dir.path()).output().unwrap().status;
    assert_eq!(st.code(), Some(2));
}

#[test]
fn emitted_fixtures_are_bit_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = emit_fixtures(a.path()).unwrap();
    let fb = emit_fixtures(b.path()).unwrap();
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
    let cat: Value = serde_json::from_str(&fs::read_to_string(a.path().join("catalog.json")).unwrap()).unwrap();
    let prefix: Vec<i64> = (0..6).map(|p| cat["interleaved_ordering"][p.to_string()].as_i64().unwrap()).collect();
    assert_eq!(prefix, [0, 1, 3, 5, 2, 7]);
    let row: Vec<i64> = serde_json::from_value(cat["z2_middle_row"].clone()).unwrap();
    assert_eq!(row, [-16, -8, -4, -2, -1, 0, 1, 2, 4, 8, 16]);
    let dup = fs::read_to_string(a.path().join("duplicated_basis.csv")).unwrap();
    assert_eq!(dup.lines().count() - 1, 16);
}
