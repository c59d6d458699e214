use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn nonloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonloc")).args(args).env_remove("NONLOC_CACHE_DIR").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_and_rejects() {
    let ok = nonloc(&["validate", path(&fixture("behaviors/pr_box.json"))]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json_of(&ok)["valid"], true);
    let bad = nonloc(&["validate", path(&fixture("behaviors/signaling.json"))]);
    assert_eq!(bad.status.code(), Some(2));
    let doc = json_of(&bad);
    assert_eq!(doc["valid"], false);
    assert!(doc["violations"].as_array().unwrap().iter().all(|v| v["kind"] == "signaling"));
}

#[test]
fn missing_and_malformed_inputs_exit_two() {
    assert_eq!(nonloc(&["validate", "/nonexistent/behavior.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"scenario\": {\"settings\": [1], \"outcomes\": [2]},\n  \"mode\": \"rational\",\n  \"table\": [\n    {\"x\": [0], \"a\": [0], \"p\": \"1/2\"},\n    {\"x\": [0], \"a\": [1], \"p\": \"oops\"}\n  ]\n}\n").unwrap();
    let out = nonloc(&["local-fraction", path(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"));
    assert_eq!(nonloc(&["chained-sweep", "--n-max", "1"]).status.code(), Some(2));
    assert_eq!(nonloc(&["svetlichny", path(&fixture("behaviors/pr_box.json"))]).status.code(), Some(2));
}

#[test]
fn local_fraction_of_pr_and_deterministic_boxes() {
    let pr = json_of(&nonloc(&["local-fraction", path(&fixture("behaviors/pr_box.json"))]));
    assert_eq!(pr["values"]["p_L"], "0");
    assert_eq!(pr["mode"], "rational");
    assert_eq!(pr["dual"]["verified"], true);
    let det = json_of(&nonloc(&["local-fraction", path(&fixture("behaviors/deterministic_box.json"))]));
    assert_eq!(det["values"]["p_L"], "1");
}

#[test]
fn tsirelson_in_float_mode_and_rational_rejection() {
    let out = nonloc(&["local-fraction", path(&fixture("behaviors/tsirelson_box.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let p = json_of(&out)["values"]["p_L"].as_f64().unwrap();
    assert!((p - (2.0 - 2f64.sqrt())).abs() < 1e-6);
    let forced = nonloc(&["--mode", "rational", "local-fraction", path(&fixture("behaviors/tsirelson_box.json"))]);
    assert_eq!(forced.status.code(), Some(2));
}

#[test]
fn mermin_svetlichny_and_cut_scan() {
    let mermin = path(&fixture("behaviors/mermin_box.json")).to_string();
    let sv = json_of(&nonloc(&["svetlichny", &mermin]));
    assert_eq!(sv["values"]["p_NS"], "0");
    assert_eq!(sv["values"]["p_L"], "0");
    let scan = json_of(&nonloc(&["cut-scan", &mermin]));
    let per_cut = scan["values"]["per_cut"].as_object().unwrap();
    assert_eq!(per_cut.len(), 3);
    assert!(per_cut.values().all(|v| v == "1"));
    let svet = json_of(&nonloc(&["svetlichny", path(&fixture("behaviors/svetlichny_box.json"))]));
    assert_eq!(svet["values"]["p_NS"], "1");
}

#[test]
fn cut_scan_reports_caps() {
    let out = nonloc(&["--vertex-cap", "50", "cut-scan", path(&fixture("behaviors/mermin_box.json"))]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json_of(&out);
    assert!(doc["cuts"].as_array().unwrap().iter().all(|c| c["status"] == "cap-exceeded"));
}

#[test]
fn born_reproduces_the_tsirelson_fixture() {
    let out = nonloc(&["born", "--state", path(&fixture("states/singlet.json")), "--measurements", path(&fixture("measurements/chsh.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let got = json_of(&out);
    let want: Value = serde_json::from_str(&std::fs::read_to_string(fixture("behaviors/tsirelson_box.json")).unwrap()).unwrap();
    let (g, w) = (got["table"].as_array().unwrap(), want["table"].as_array().unwrap());
    assert_eq!(g.len(), w.len());
    for (a, b) in g.iter().zip(w) {
        assert_eq!(a["x"], b["x"]);
        assert_eq!(a["a"], b["a"]);
        assert!((a["p"].as_f64().unwrap() - b["p"].as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn certify_graph_k4_and_graph_file() {
    let out = nonloc(&["certify-graph", "--m", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["verdict"], "PASS");
    assert_eq!(doc["pairs"].as_array().unwrap().len(), 6);
    assert_eq!(doc["theorem2"]["covering"].as_array().unwrap().len(), 7);
    let file = json_of(&nonloc(&["certify-graph", "--graph", path(&fixture("graphs/k5.json"))]));
    assert_eq!(file["verdict"], "PASS");
    assert_eq!(file["subject"], "graph:k5");

    let dir = tempfile::tempdir().unwrap();
    let split = dir.path().join("split.json");
    std::fs::write(&split, "[[1],[0],[3],[2]]\n").unwrap();
    let out = nonloc(&["certify-graph", "--graph", path(&split)]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json_of(&out)["verdict"], "FAIL");
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["certify-graph", "--m", "4"],
        vec!["--seed", "9", "sample", "--settings", "2,2", "--outcomes", "2,2"],
        vec!["vertices", "--settings", "2,2", "--outcomes", "2,2"],
        vec!["chained-sweep", "--n-max", "4"],
    ] {
        let a = nonloc(&args);
        let b = nonloc(&args);
        let mut seq = vec!["--sequential"];
        seq.extend(&args);
        let c = nonloc(&seq);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, c.stdout, "{args:?}");
    }
    let s1 = nonloc(&["--seed", "1", "sample", "--settings", "2,2", "--outcomes", "2,2"]);
    let s2 = nonloc(&["--seed", "2", "sample", "--settings", "2,2", "--outcomes", "2,2"]);
    assert_ne!(s1.stdout, s2.stdout);
}

#[test]
fn sampled_behaviors_round_trip_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    let out = nonloc(&["--seed", "4", "--out", path(&file), "sample", "--settings", "2,2,2", "--outcomes", "2,2,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(nonloc(&["validate", path(&file)]).status.code(), Some(0));
    assert_eq!(nonloc(&["svetlichny", path(&file)]).status.code(), Some(0));
}

#[test]
fn vertex_export_header() {
    let doc = json_of(&nonloc(&["vertices", "--settings", "2,2", "--outcomes", "2,2"]));
    assert_eq!(doc["provenance"]["method"], "no_signaling");
    assert_eq!(doc["provenance"]["count"], 24);
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 24);
    let local = json_of(&nonloc(&["vertices", "--settings", "2,2", "--outcomes", "2,2", "--kind", "local"]));
    assert_eq!(local["provenance"]["count"], 16);
    let capped = nonloc(&["--ns-table-cap", "8", "vertices", "--settings", "2,2", "--outcomes", "2,2"]);
    assert_eq!(capped.status.code(), Some(3));
}

#[test]
fn chained_sweep_csv() {
    let out = nonloc(&["chained-sweep", "--n-max", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,p_L");
    let values: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 4);
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn fixtures_check_reports_current_tree() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    assert_eq!(nonloc(&["fixtures", path(&root), "--check"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nonloc(&["fixtures", path(dir.path()), "--check"]).status.code(), Some(1));
    assert_eq!(nonloc(&["fixtures", path(dir.path())]).status.code(), Some(0));
    assert_eq!(nonloc(&["fixtures", path(dir.path()), "--check"]).status.code(), Some(0));
}
