use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_metastable"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const MONOTONE: &str = r#"{"prefix": ["0", "1/4", "1/2", "3/4", "1"]}"#;
const STEP: &str = r#"{"prefix": [0, 0, 0, 1]}"#;
const JUMP: &str = r#"{"prefix": [0, 1]}"#;

#[test]
fn analyze_monotone_sequence() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "s.json", MONOTONE);
    let o = run(&["analyze", "--seq", s(&seq), "--eps", "1/2", "--F", "n+1", "--E", "0..2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("rate holds, witness i="), "{}", stdout(&o));
}

#[test]
fn analyze_reports_a_failing_rate() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "step.json", STEP);
    let o = run(&["analyze", "--seq", s(&seq), "--eps", "1/2", "--F", "n+1", "--E", "2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("rate fails"));
}

#[test]
fn monotone_rate_example() {
    let o = run(&["rate", "monotone", "--eps", "2/5", "--F", "2n+1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "E={0..7}");
}

#[test]
fn emitted_rates_round_trip_through_analyze() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "s.json", MONOTONE);
    let jump = write(&dir, "jump.json", JUMP);
    for (eps, f) in [("2/5", "2n+1"), ("1/10", "n+1"), ("1/4", "n+2")] {
        let emitted = run(&["--json", "rate", "monotone", "--eps", eps, "--F", f]);
        assert_eq!(code(&emitted), 0);
        let rate = write(&dir, "rate.json", &stdout(&emitted));
        let direct = run(&["--json", "analyze", "--seq", s(&seq), "--eps", eps, "--F", f]);
        let via_file = run(&["--json", "analyze", "--seq", s(&seq), "--eps", eps, "--F", f, "--E", s(&rate)]);
        assert_eq!(code(&via_file), 0);
        let a: Value = serde_json::from_str(&stdout(&direct)).unwrap();
        let b: Value = serde_json::from_str(&stdout(&via_file)).unwrap();
        assert_eq!(a["holds"], b["holds"]);
    }

    // a rate found for one sequence, re-fed for a sequence where it fails
    let found = run(&["--json", "rate", "brute", "--seqs", s(&seq), "--eps", "1/2", "--F", "n+1"]);
    let rate = write(&dir, "brute.json", &stdout(&found));
    let again = run(&["--json", "rate", "audit", "--seqs", s(&seq), "--eps", "1/2", "--F", "n+1", "--E", s(&rate)]);
    assert_eq!(code(&again), 0);
    let fails = run(&["analyze", "--seq", s(&jump), "--eps", "1/2", "--F", "n+1", "--E", s(&rate)]);
    assert_eq!(code(&fails), 1);
}

#[test]
fn brute_and_audit_on_a_family() {
    let dir = TempDir::new().unwrap();
    let fam = write(&dir, "fam.json", &format!("[{MONOTONE}, {JUMP}]"));
    let o = run(&["rate", "brute", "--seqs", s(&fam), "--eps", "1/2", "--F", "n+1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("E={0, 1} "), "{}", stdout(&o));
    let o = run(&["rate", "audit", "--seqs", s(&fam), "--eps", "1/2", "--F", "n+1", "--E", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("sequence 1"));
    let o = run(&["rate", "brute", "--seqs", s(&fam), "--eps", "1/2", "--F", "n+1", "--horizon", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn logic_check_modes() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.json",
        r#"{"sorts": {"M": {"points": ["a", "b"], "metric": [["0", "1001/1000"], ["1001/1000", "0"]], "anchor": "a"}}}"#,
    );
    let o = run(&["logic", "check", "--structure", s(&m), "--formula", "d(b,a) <= 1", "--mode", "approx"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("gap 1/1000"));
    let o = run(&["logic", "check", "--structure", s(&m), "--formula", "d(b,a) <= 1001/1000"]);
    assert_eq!(code(&o), 0);
    let o = run(&["logic", "check", "--structure", s(&m), "--formula", "d(x,a) >= 1", "--assign", "x=b", "--mode", "exact"]);
    assert_eq!(code(&o), 0);
    let o = run(&["--json", "logic", "check", "--structure", s(&m), "--formula", "E 2 x. d(x,a) >= 1"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["holds"], Value::Bool(true));
}

#[test]
fn malformed_input_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "s.json", MONOTONE);
    let m = write(&dir, "m.json", r#"{"sorts": {"M": {"points": ["a"], "metric": [["0"]], "anchor": "a"}}}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["analyze", "--seq", s(&seq), "--eps", "one half", "--F", "n+1"],
        vec!["analyze", "--seq", "/nonexistent.json", "--eps", "1/2", "--F", "n+1"],
        vec!["analyze", "--seq", s(&seq), "--eps", "1/2", "--F", "n-1"],
        vec!["analyze", "--seq", s(&seq), "--eps", "1/2", "--F", "n+1", "--E", "5..2"],
        vec!["logic", "check", "--structure", s(&m), "--formula", "d(a,a) <="],
        vec!["logic", "check", "--structure", s(&m), "--formula", "E 0 x. d(x,a) <= 1"],
        vec!["rate", "monotone", "--eps", "0", "--F", "n+1"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn csv_sequences_use_float_mode() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "s.csv", "0.1\n0.2\n0.30000000000000004\n0.3\n");
    let o = run(&["--json", "analyze", "--seq", s(&csv), "--eps", "0", "--F", "n+1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["witness"], Value::from(2));
    let periodic = write(&dir, "p.csv", "5\n0\n1\n");
    let o = run(&["analyze", "--seq", s(&periodic), "--eps", "1/2", "--F", "n+1", "--period", "2"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn measure_commands() {
    let dir = TempDir::new().unwrap();
    let ok = write(
        &dir,
        "mu.json",
        r#"{"omega": ["w1", "w2", "w3"], "anchor": "w1", "weights": {"w1": "1/2", "w2": "1/3", "w3": "1/6"}, "kind": "probability"}"#,
    );
    let o = run(&["measure", "audit", "--structure", s(&ok), "--function", "[1, -2, 0]"]);
    assert_eq!(code(&o), 0);
    let o = run(&["measure", "integrate", "--structure", s(&ok), "--f", r#"{"w1": 1, "w2": -2, "w3": 0}"#]);
    assert_eq!(stdout(&o).lines().next(), Some("I f = -1/6"));
    let bad = write(
        &dir,
        "bad.json",
        r#"{"omega": ["a", "b"], "anchor": "a", "weights": {"a": "2", "b": "-1"}, "kind": "finite"}"#,
    );
    let o = run(&["--json", "measure", "audit", "--structure", s(&bad)]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let failed: Vec<&str> = v["preloeb"]["clauses"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == Value::Bool(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"0 ≤ μ(A)"), "{failed:?}");
    let o = run(&["measure", "tv", "--structure", s(&bad), "--mode", "audit"]);
    assert_eq!(stdout(&o).trim(), "‖μ‖ = 3");
}

#[test]
fn dct_commands() {
    let dir = TempDir::new().unwrap();
    let fam = write(
        &dir,
        "fam.json",
        r#"{"measure": {"omega": ["u", "v"], "anchor": "u", "weights": {"u": "1/2", "v": "1/2"}, "kind": "probability"},
            "slices": {"u": {"prefix": [1, -1], "tail": {"period": 2}}, "v": {"prefix": [-1, 1], "tail": {"period": 2}}},
            "norm_phi": "1"}"#,
    );
    let o = run(&["--json", "dct", "check", "--family", s(&fam)]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["lhs"].as_str(), v["rhs"].as_str()), (Some("0"), Some("2")));
    let o = run(&["dct", "search", "--class", s(&fam)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("precondition violated by family 0"));
}

#[test]
fn seeded_search_is_reproducible() {
    let args = ["--json", "dct", "search", "--monotone", "--levels", "2", "--len", "3", "--validate", "50"];
    let a = bin().args(args).env("METASTABLE_SEED", "11").output().unwrap();
    let b = bin().args(args).env("METASTABLE_SEED", "11").output().unwrap();
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["validation"]["seed"], Value::from(11));
    assert_eq!(v["validation"]["passed"], Value::Bool(true));
}
