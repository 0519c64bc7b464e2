use std::path::PathBuf;
use std::process::{Command, Output};

use iterfr::ordering::Verdict;
use serde_json::Value;

fn iterfr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iterfr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("iterfr-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(path: &PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn roots_document() {
    let out = iterfr(&["roots", "--exppoly", "1*e(-1)+(-1)*e(-2)", "--json", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let doc: Value = serde_json::from_str(&stdout[stdout.find('{').unwrap()..]).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["bound"], 1);
    assert_eq!(doc["isolated_roots"].as_array().unwrap().len(), 1);
}

#[test]
fn exit_codes() {
    let refuted = iterfr(&["compare", "--x", "bpareto(5,10)", "--y", "bpareto(2,6)", "--s", "2"]);
    assert_eq!(refuted.status.code(), Some(1));
    let supported = iterfr(&["compare", "--x", "maxexp(1,1)", "--y", "maxexp(1,2)", "--s", "2", "--criterion", "newcrit"]);
    assert_eq!(supported.status.code(), Some(0));
    let bad_s = iterfr(&["compare", "--x", "exp(1)", "--y", "exp(2)", "--s", "0"]);
    assert_eq!(bad_s.status.code(), Some(2));
    let bad_dist = iterfr(&["analyze", "--dist", "gama(2,1)"]);
    assert_eq!(bad_dist.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_dist.stderr).contains("gama"));
    let io = iterfr(&["casebook", "--id", "EX_POLYEXP", "--json", "/nonexistent/dir/out.json"]);
    assert_eq!(io.status.code(), Some(4));
    let unknown = iterfr(&["casebook", "--id", "NOPE"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn kx_case_refutes_and_casebook_passes() {
    let out = iterfr(&[
        "compare",
        "--x",
        "maxexp(0.34,1)",
        "--y",
        "maxexp(1,11)",
        "--s",
        "2",
        "--criterion",
        "ifra",
        "--pin-a",
        "2.89",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let case = iterfr(&["casebook", "--id", "KX_CONJECTURE_CE"]);
    assert_eq!(case.status.code(), Some(0));
}

#[test]
fn verdict_document_replays_from_its_grid() {
    let first = temp("first.json");
    let second = temp("second.json");
    let args = ["compare", "--x", "gamma(1.5,1)", "--y", "gamma(3,1)", "--s", "1", "--n-a", "16", "--n-b", "8"];
    let out = iterfr(&[&args[..], &["--json", first.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(1));
    let out = iterfr(&[
        "compare",
        "--x",
        "gamma(1.5,1)",
        "--y",
        "gamma(3,1)",
        "--s",
        "1",
        "--grid",
        first.to_str().unwrap(),
        "--json",
        second.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let (mut a, mut b) = (json(&first), json(&second));
    a["runtime_ms"] = Value::Null;
    b["runtime_ms"] = Value::Null;
    assert_eq!(a, b);
    let v: Verdict = serde_json::from_value(a).unwrap();
    assert!(v.is_refuted());
}

#[test]
fn thread_count_does_not_change_documents() {
    let docs: Vec<Value> = ["1", "3"]
        .iter()
        .map(|n| {
            let path = temp(&format!("threads-{n}.json"));
            let out = iterfr(&[
                "--threads",
                n,
                "compare",
                "--x",
                "bpareto(5,10)",
                "--y",
                "bpareto(2,6)",
                "--s",
                "2",
                "--json",
                path.to_str().unwrap(),
            ]);
            assert_eq!(out.status.code(), Some(1));
            let mut doc = json(&path);
            doc["runtime_ms"] = Value::Null;
            doc
        })
        .collect();
    assert_eq!(docs[0], docs[1]);
}

#[test]
fn scan_writes_csv_trace() {
    let path = temp("trace.csv");
    let out = iterfr(&[
        "scan",
        "--function",
        "v",
        "--x",
        "gamma(2,1)",
        "--y",
        "gamma(3,1)",
        "--s",
        "2",
        "--a",
        "1.2",
        "--b",
        "-0.5",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,value,sign"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() > 100);
    assert!(rows.iter().all(|r| r.split(',').count() == 3));
}

#[test]
fn analyze_lists_every_order() {
    let path = temp("analyze.json");
    let out = iterfr(&["analyze", "--dist", "polyexp(1)", "--s-max", "2", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&path);
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["ifr"]["verdict"], "non_monotone");
    assert_eq!(entries[1]["ifr"]["verdict"], "increasing");
}
