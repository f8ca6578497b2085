use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biunitary")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn build(dir: &Path, diagram: &str, ch: &str) -> std::path::PathBuf {
    let out = dir.join(format!("{diagram}{}.json", if ch == "+" { "p" } else { "m" }));
    let o = run(&["ade", "build", "--diagram", diagram, "--chirality", ch, "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn verify_passes_on_e6() {
    let dir = tempfile::tempdir().unwrap();
    let e6 = build(dir.path(), "E6", "+");
    let o = run(&["verify", "--conn", p(&e6)]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["pass"], true);
}

#[test]
fn e7_flatness_fails_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let e7 = build(dir.path(), "E7", "+");
    let report = dir.path().join("flat.json");
    let o = run(&["flatness", "--conn", p(&e7), "--max", "4", "4", "--out", p(&report)]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["verdict"], "violated");
    assert_eq!(doc["witness"]["size"], serde_json::json!([4, 4]));
}

#[test]
fn a4_flatness_passes() {
    let dir = tempfile::tempdir().unwrap();
    let a4 = build(dir.path(), "A4", "-");
    let o = run(&["flatness", "--conn", p(&a4), "--max", "3", "3"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"shape\": [1, 2").unwrap();
    assert_eq!(run(&["verify", "--conn", p(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--conn", p(&dir.path().join("missing.json"))]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["ade", "build", "--diagram", "E9"]).status.code(), Some(2));
}

#[test]
fn emitted_connection_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let e6 = build(dir.path(), "E6", "-");
    let text = std::fs::read_to_string(&e6).unwrap();
    let w = biunitary::Connection::from_json(&text).unwrap();
    assert_eq!(w.to_json(), text);
}

#[test]
fn compose_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let w1 = dir.path().join("w1.json");
    let o = run(&["su2k", "gen", "--k", "3", "--lambda", "1", "--mu", "1", "--out", p(&w1)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    biunitary::Connection::from_json(&std::fs::read_to_string(&w1).unwrap()).unwrap();
    let sq = dir.path().join("sq.json");
    let o = run(&["compose", "--up", p(&w1), "--down", p(&w1), "--out", p(&sq)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let parts = dir.path().join("parts");
    let o = run(&["decompose", "--conn", p(&sq), "--out", p(&parts)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(parts.join("decomposition.json")).unwrap()).unwrap();
    assert!(doc.to_string().contains("multiplicity"));
    assert!(parts.join("part0.json").exists());
    // mismatched middle graphs are reported as errors
    let e6 = build(dir.path(), "E6", "+");
    assert_eq!(run(&["compose", "--up", p(&w1), "--down", p(&e6)]).status.code(), Some(2));
}

#[test]
fn module_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let mdir = dir.path().join("e6");
    let o = run(&["ghj", "solve", "--diagram", "E6", "--out", p(&mdir)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = mdir.join("module.json");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["theta"], serde_json::json!([0, 6]));
    let w4 = dir.path().join("w4.json");
    let o = run(&["alpha", "induce", "--module", p(&manifest), "--lambda", "1", "--chirality", "-", "--out", p(&w4)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(run(&["verify", "--conn", p(&w4)]).status.code(), Some(0));
    let o = run(&["oracle", "compare", "--module", p(&manifest)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn su2k_and_pf() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["su2k", "gen", "--k", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["k"], 4);
    let g = dir.path().join("g.json");
    std::fs::write(&g, r#"{"even":["a","c"],"odd":["b"],"mult":[[1],[1]]}"#).unwrap();
    let o = run(&["pf", "--graph", p(&g)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((doc["beta"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
}
