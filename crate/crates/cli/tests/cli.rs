use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_expsum"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn write(dir: &tempfile::TempDir, name: &str, v: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, v).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn run_json(dir: &tempfile::TempDir, cmd: &str, cfg: Value) -> (i32, String) {
    let path = write(dir, "case.json", &cfg.to_string());
    run(&[cmd, path.to_str().unwrap()])
}

fn gauss() -> Value {
    json!({
        "p": 5,
        "curve": {"type": "p1"},
        "boundary": [{"kind": "infinite"}],
        "f": {"laurent": [[2, 1]]}
    })
}

fn required(schema: &str) -> Vec<String> {
    let s: Value = serde_json::from_str(&std::fs::read_to_string(repo().join("docs").join(schema)).unwrap()).unwrap();
    s["required"].as_array().unwrap().iter().map(|k| k.as_str().unwrap().to_string()).collect()
}

#[test]
fn gauss_sum_verifies_and_is_attained() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_json(&dir, "verify", gauss());
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["attained"], json!(true));
    assert_eq!(r["lies_above"], json!(true));
    assert_eq!(r["degree_rho"], json!(1));
    assert_eq!(r["newton_rho"], json!([[1, 2, 1]]));
    for key in required("report.schema.json") {
        assert!(r.get(&key).is_some(), "missing {key}");
    }
}

#[test]
fn reports_are_byte_identical() {
    let cfg = repo().join("configs/kloosterman.json");
    let a = run(&["verify", cfg.to_str().unwrap()]);
    let b = run(&["--jobs", "1", "verify", cfg.to_str().unwrap()]);
    assert_eq!(a, b);
    assert_eq!(a.0, 0);
}

#[test]
fn even_characteristic_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = gauss();
    cfg["p"] = json!(2);
    let (code, out) = run_json(&dir, "verify", cfg);
    assert_eq!(code, 2);
    assert!(out.contains("RejectEvenChar"), "{out}");
}

#[test]
fn omitted_pole_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "p": 3,
        "curve": {"type": "p1"},
        "boundary": [{"kind": "infinite"}],
        "f": {"laurent": [[1, 1], [-1, 1]]}
    });
    let (code, out) = run_json(&dir, "verify", cfg);
    assert_eq!(code, 2);
    assert!(out.contains("PoleOnV"), "{out}");
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = gauss();
    cfg["colour"] = json!("blue");
    let (code, out) = run_json(&dir, "verify", cfg);
    assert_eq!(code, 2);
    assert!(out.contains("Schema"), "{out}");
    let (code, _) = run(&["verify", "/nonexistent/case.json"]);
    assert_eq!(code, 2);
}

#[test]
fn shipped_configs_are_accepted() {
    let dir = repo().join("configs");
    for name in ["gauss", "kloosterman", "genus2", "artin_schreier_x4"] {
        let path = dir.join(format!("{name}.json"));
        let (code, out) = run(&["verify", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{name}: {out}");
    }
}

#[test]
fn monomial_sweep_has_five_lines_and_summary() {
    let path = repo().join("configs/gm_monomial_sweep.json");
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    let (code, out) = run(&["sweep", path.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    let summary = &lines[5]["summary"];
    assert_eq!(summary["cases"], json!(5));
    assert_eq!(summary["robba_disagreement"], json!(0));
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 6);
}

#[test]
fn empty_sweep_is_summary_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"template": gauss(), "params": {"d": []}});
    let (code, out) = run_json(&dir, "sweep", cfg);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains("\"summary\""));
}

#[test]
fn malformed_sweep_case_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let mut template = gauss();
    template["p"] = json!("$p");
    let cfg = json!({"template": template, "params": {"p": [5, 4]}});
    let (code, out) = run_json(&dir, "sweep", cfg);
    assert_eq!(code, 2);
    let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].get("report").is_some());
    assert!(lines[1].get("error").is_some());
    assert_eq!(lines[2]["summary"]["errors"], json!(1));
}

#[test]
fn oracle_matches_on_kloosterman() {
    let path = repo().join("configs/kloosterman.json");
    let (code, out) = run(&["oracle", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["match"], json!(true));
    for key in required("oracle.schema.json") {
        assert!(r.get(&key).is_some(), "missing {key}");
    }
}

#[test]
fn oracle_rejects_hyperelliptic() {
    let path = repo().join("configs/genus2.json");
    let (code, out) = run(&["oracle", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("OutOfScope"), "{out}");
}

#[test]
fn polygon_lies_above_for_kloosterman() {
    let c = repo().join("configs");
    let a = c.join("kloosterman_newton.json");
    let b = c.join("kloosterman_hodge.json");
    let (code, out) = run(&["polygon", "lies-above", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["lies_above"], json!(true));
}

#[test]
fn polygon_hull_and_scale() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(&dir, "pts.csv", "index,valuation\n0,0\n1,2\n2,1\n");
    let (code, out) = run(&["polygon", "hull", pts.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["slopes"], json!(["1/2", "1/2"]));

    let poly = write(&dir, "poly.json", r#"[[1,2,1]]"#);
    let (code, out) = run(&["polygon", "scale", poly.to_str().unwrap(), "--factor", "1/2"]);
    assert_eq!(code, 2, "{out}");
    let (code, out) = run(&["polygon", "scale", poly.to_str().unwrap(), "--factor", "2"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["slopes"], json!(["1/2", "1/2"]));

    let (code, out) = run(&["polygon", "truncate", poly.to_str().unwrap(), "--below", "1"]);
    assert_eq!(code, 0, "{out}");
    let bad = write(&dir, "bad.json", "{not json");
    let (code, _) = run(&["polygon", "concat", bad.to_str().unwrap(), poly.to_str().unwrap()]);
    assert_eq!(code, 2);
}
