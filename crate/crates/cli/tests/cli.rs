use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cae_core::bundled::{OFFLINE_CASE, SCENARIOS_FIXTURE};
use serde_json::Value;
use tempfile::TempDir;

fn cae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cae")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let f = Files { dir: tempfile::tempdir().unwrap() };
        f.write("offline.case.json", OFFLINE_CASE);
        f
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_string()
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_ok_and_cycle() {
    let f = Files::new();
    let ok = cae(&["validate", &f.path("offline.case.json")]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));

    let mut doc: Value = serde_json::from_str(OFFLINE_CASE).unwrap();
    doc["blocks"][0]["children"].as_array_mut().unwrap().push("C2.2.1".into());
    let cyclic = f.write("cyclic.case.json", &doc.to_string());
    let bad = cae(&["validate", s(&cyclic)]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("cycle"), "{}", stderr(&bad));
}

#[test]
fn usage_and_domain_exit_codes() {
    assert_eq!(cae(&[]).status.code(), Some(2));
    assert_eq!(cae(&["propagate"]).status.code(), Some(2));
    assert_eq!(cae(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cae(&["required-confidence", "--target", "1.5", "--n", "3"]).status.code(), Some(2));
    assert_eq!(cae(&["required-confidence", "--target", "0.9", "--n", "0"]).status.code(), Some(2));
    assert_eq!(cae(&["propagate", "x.json", "--method", "mean"]).status.code(), Some(2));
    assert_eq!(cae(&["--help"]).status.code(), Some(0));

    let missing = cae(&["propagate", "/nonexistent/case.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).starts_with("error: reading"));
    assert_eq!(cae(&["defeaters", "checklist", "--category", "astrology"]).status.code(), Some(1));
}

#[test]
fn propagate_json_and_exact() {
    let f = Files::new();
    let v = json(&cae(&["propagate", &f.path("offline.case.json"), "--format", "json"]));
    assert_eq!(v["method"], "product");
    assert!((v["per_node"]["C2.2.1"].as_f64().unwrap() - 0.1741824).abs() < 1e-12);
    assert_eq!(v["flags"]["C2.2.1"], "UNSUPPORTED");

    let exact = json(&cae(&["propagate", &f.path("offline.case.json"), "--exact", "--format", "json"]));
    assert_eq!(exact["per_node"]["C2.2.1"], "13608/78125");
    let sod = json(&cae(&["propagate", &f.path("offline.case.json"), "--exact", "--method", "sod", "--format", "json"]));
    assert_eq!(sod["raw_per_node"]["C2.2.1"], "-1/2");
    assert_eq!(sod["per_node"]["C2.2.1"], "0");
}

#[test]
fn required_confidence_both_methods() {
    let sod = json(&cae(&["required-confidence", "--target", "0.95", "--n", "7", "--method", "sod", "--format", "json"]));
    assert!((sod["required"].as_f64().unwrap() - 0.99286).abs() < 1e-5);
    let prod = cae(&["required-confidence", "--target", "0.95", "--n", "7"]);
    assert!(stdout(&prod).starts_with("0.99270 per assigned node (product"));
}

#[test]
fn whatif_sets_and_rejects() {
    let f = Files::new();
    let v = json(&cae(&["whatif", &f.path("offline.case.json"), "--set", "C2.2.1.1=0.85", "--format", "json"]));
    assert_eq!(v["delta"], 0.08);
    assert!((v["top"].as_f64().unwrap() - 0.2467584).abs() < 1e-12);
    let text = stdout(&cae(&["whatif", &f.path("offline.case.json"), "--set", "C2.2.1.1=0.85"]));
    assert!(text.ends_with("top 0.17 -> 0.25 (+0.08)\n"), "{text}");

    assert_eq!(cae(&["whatif", &f.path("offline.case.json")]).status.code(), Some(2));
    assert_eq!(cae(&["whatif", &f.path("offline.case.json"), "--set", "C2.2.1=0.5"]).status.code(), Some(1));
}

#[test]
fn prioritise_and_weights() {
    let f = Files::new();
    let v = json(&cae(&["defeaters", "prioritise", &f.path("offline.case.json"), "--format", "json"]));
    let ids: Vec<&str> = v["stage3"].as_array().unwrap().iter().map(|d| d["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["D1", "D2"]);
    assert!(v["header"].as_str().unwrap().contains("independent"));

    let grid = json(&cae(&["defeaters", "prioritise", &f.path("offline.case.json"), "--sensitivity", "--format", "json"]));
    assert_eq!(grid["sensitivity"].as_array().unwrap().len(), 28);
    assert_eq!(cae(&["defeaters", "prioritise", &f.path("offline.case.json"), "--weights", "1,0,1"]).status.code(), Some(2));
}

#[test]
fn checklist_filters() {
    let all = json(&cae(&["defeaters", "checklist", "--format", "json"]));
    assert_eq!(all.as_array().unwrap().len(), 19);
    let biases = json(&cae(&["defeaters", "checklist", "--category", "cognitive biases", "--format", "json"]));
    assert_eq!(biases.as_array().unwrap().len(), 6);
}

#[test]
fn soundness_reports_the_top() {
    let f = Files::new();
    let v = json(&cae(&["soundness", &f.path("offline.case.json"), "--format", "json"]));
    assert_eq!(v["top_state"], "UNSUPPORTED");
    assert_eq!(v["validity"]["C2.2.1.2"]["state"], "SUPPORTED");
    let text = stdout(&cae(&["soundness", &f.path("offline.case.json")]));
    assert!(text.ends_with("top claim C2.2.1: UNSUPPORTED\n"));
}

#[test]
fn delphi_run_is_reproducible() {
    let f = Files::new();
    let q = f.write("q.txt", "Will the detector miss a novel attack?\n");
    let args = |t: &str| {
        vec![
            "delphi".to_string(),
            "run".into(),
            "--scenario".into(),
            s(&q).into(),
            "--backend".into(),
            "simulated".into(),
            "--centre".into(),
            "0.71".into(),
            "--seed".into(),
            "7".into(),
            "--transcript".into(),
            f.path(t),
        ]
    };
    let run = |t: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_cae")).args(args(t)).output().unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(f.path(t)).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));

    let repeated = json(&cae(&[
        "delphi", "run", "--scenario", s(&q), "--backend", "simulated", "--centre", "0.71", "--runs", "10", "--format", "json",
    ]));
    assert_eq!(repeated["runs"].as_array().unwrap().len(), 10);
    assert!((repeated["mean"].as_f64().unwrap() - 0.71).abs() <= 0.02);

    let scripted = cae(&["delphi", "run", "--scenario", s(&q)]);
    assert_eq!(scripted.status.code(), Some(2));
}

#[test]
fn delphi_run_on_a_scenario_object() {
    let f = Files::new();
    let sc = f.write("s.json", r#"{"id": "S9", "description": "q", "reference_estimate": 0.3, "outcome": 0}"#);
    let v = json(&cae(&["delphi", "run", "--scenario", s(&sc), "--experts", "5", "--format", "json"]));
    assert_eq!(v["final_estimate"], 0.3);
    assert_eq!(v["scenario_id"], "S9");
}

#[test]
fn delphi_bench_scores() {
    let f = Files::new();
    let path = f.write("scenarios.json", SCENARIOS_FIXTURE);
    let v = json(&cae(&["delphi", "bench", "--scenarios", s(&path), "--experts", "5", "--format", "json"]));
    assert_eq!(v["calibration_metric"], "brier");
    assert_eq!(v["resolved"], 2);
    assert!((v["calibration_ours"].as_f64().unwrap() - 0.01).abs() < 1e-12);

    let half = json(&cae(&[
        "delphi", "bench", "--scenarios", s(&path), "--backend", "simulated", "--centre", "0.5", "--noise", "0", "--format",
        "json",
    ]));
    assert_eq!(half["calibration_ours"], 0.25);

    let empty = f.write("empty.json", "[]");
    assert_eq!(cae(&["delphi", "bench", "--scenarios", s(&empty)]).status.code(), Some(1));
}

#[test]
fn report_summary_and_sentence() {
    let f = Files::new();
    let out = f.path("summary.svg");
    let o = cae(&["report", "summary", &f.path("offline.case.json"), "--ev", "4", "-o", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("LOGICALLY UNSUPPORTED"));
    let stdout_svg = stdout(&cae(&["report", "summary", &f.path("offline.case.json"), "--ev", "4"]));
    assert_eq!(stdout_svg, svg);
    assert_eq!(cae(&["report", "summary", &f.path("offline.case.json"), "--ev", "6"]).status.code(), Some(2));

    let record = json(&cae(&["report", "summary", &f.path("offline.case.json"), "--format", "json"]));
    assert_eq!(record["framing"], "negative");

    let judgements = f.write("j.json", r#"{"system": "I reviewed the deployment architecture."}"#);
    let text = stdout(&cae(&["report", "sentence", &f.path("offline.case.json"), "--judgements", s(&judgements)]));
    assert!(text.contains("I reviewed the deployment architecture."));
    assert!(text.contains("7 clauses not provided"));
}

#[test]
fn serve_fails_cleanly_on_a_busy_port() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port().to_string();
    let o = cae(&["serve", "--port", &port]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error"));
}
