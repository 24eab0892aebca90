//! Black-box tests of the `hrmv` binary: exit codes, decomposition
//! output, simulation, and DOT rendering. Solver-backed modes are
//! covered by the acceptance suite.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hrmv")
}

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("HRMV_SOLVER")
        .output()
        .expect("spawn hrmv")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = run(&["check", "/no/such/file.lus"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unparsable_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.lus");
    std::fs::write(&path, "node N (a : int returns").unwrap();
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verification_without_a_solver_is_a_usage_error() {
    let out = run(&["check", corpus("counter.lus").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver"));
}

#[test]
fn unknown_main_node_is_a_usage_error() {
    let out = run(&[
        "simulate",
        corpus("counter.lus").to_str().unwrap(),
        "--main",
        "Nope",
        "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn decompose_promotes_the_call_interface() {
    let out = run(&["decompose", corpus("nfilters_2.lus").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Filter0_out1 : bool"));
    assert!(text.contains("Filter0_in2 : real"));
    assert!(!text.contains("Filter("), "call equations must be gone");
    // The emitted program is valid input again.
    let p = hrmv_lustre::parser::parse(&text).unwrap();
    hrmv_lustre::typecheck::typecheck(&p).unwrap();
}

#[test]
fn decompose_leaves_flat_programs_unchanged() {
    let out = run(&["decompose", corpus("counter.lus").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let original =
        hrmv_lustre::parser::parse(&std::fs::read_to_string(corpus("counter.lus")).unwrap())
            .unwrap();
    assert_eq!(stdout(&out), hrmv_lustre::ast::pretty_print(&original));
}

#[test]
fn decompose_writes_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let lus = dir.path().join("out.lus");
    let manifest = dir.path().join("manifest.json");
    let out = run(&[
        "decompose",
        corpus("mctrl.lus").to_str().unwrap(),
        "--out",
        lus.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(doc["main"], "MCtrl");
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 3);
    let text = std::fs::read_to_string(&lus).unwrap();
    assert!(text.contains("Controller0_u : real"));
}

#[test]
fn simulate_depth_zero_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("inputs.txt");
    std::fs::write(&inputs, "i1=true i2=1\n").unwrap();
    let out = run(&[
        "simulate",
        corpus("counter.lus").to_str().unwrap(),
        inputs.to_str().unwrap(),
        "--depth",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "");
}

#[test]
fn simulate_rejects_incomplete_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("inputs.txt");
    std::fs::write(&inputs, "i1=true\n").unwrap();
    let out = run(&[
        "simulate",
        corpus("counter.lus").to_str().unwrap(),
        inputs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("i2"));
}

#[test]
fn graph_renders_flat_and_hierarchical_nodes() {
    let flat = run(&["graph", corpus("counter.lus").to_str().unwrap()]);
    assert_eq!(flat.status.code(), Some(0));
    let text = stdout(&flat);
    assert!(text.starts_with("digraph"));
    assert!(text.contains("eq:o2"));

    let hier = run(&["graph", corpus("mctrl.lus").to_str().unwrap()]);
    assert_eq!(hier.status.code(), Some(0));
    let text = stdout(&hier);
    assert!(text.contains("subgraph cluster_0"));
    assert!(text.contains("\"Controller0\""));
    assert!(text.contains("subgraph cluster_1"));
}
