mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::scenario_dir;

fn vnfscale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vnfscale")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scenario(name: &str) -> String {
    scenario_dir().join(format!("{}.toml", name)).to_string_lossy().into_owned()
}

#[test]
fn run_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = vnfscale(&["run", &scenario("row1_overload_v3"), "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("overload"));
    for f in ["report.txt", "decisions.csv", "flows.csv"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let decisions = std::fs::read_to_string(dir.path().join("decisions.csv")).unwrap();
    assert!(decisions.lines().count() >= 4);
}

#[test]
fn all_solvers_write_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = vnfscale(&[
        "run",
        &scenario("row4_overload_v5"),
        "--solver",
        "all",
        "--iters",
        "5",
        "--seed",
        "9",
        "--beta",
        "5",
        "--out-dir",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert!(lines.next().unwrap().ends_with(",gap"));
    assert_eq!(lines.count(), 5);
    assert!(Path::new(&dir.path().join("permutations.txt")).is_file());
}

#[test]
fn bad_input_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"x\"\n[topology]\nk = 3\n").unwrap();
    let o = vnfscale(&["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = vnfscale(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn failed_expectation_exits_with_5() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("row1_overload_v3")).unwrap();
    let wrong = text.replace("launch = [\"P4\"]", "launch = [\"P9\"]");
    assert_ne!(text, wrong);
    let path = dir.path().join("wrong.toml");
    std::fs::write(&path, wrong).unwrap();
    let o = vnfscale(&["run", path.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn sweep_prints_one_row_per_arity() {
    let o = vnfscale(&["sweep", "--k", "2,4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.trim_start().starts_with("2 ")));
    assert!(text.lines().any(|l| l.trim_start().starts_with("4 ")));
}

#[test]
fn sweep_honours_the_time_budget() {
    let o = Command::new(env!("CARGO_BIN_EXE_vnfscale"))
        .args(["sweep", "--k", "4"])
        .env(vnfscale::scenario::TIME_BUDGET_ENV, "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("N/A"));
}

#[test]
fn compare_reports_a_final_gap() {
    let o = vnfscale(&["compare", &scenario("row1_overload_v3"), "--iters", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("central optimum"));
    assert!(text.contains("final gap"));
}

#[test]
fn compare_rejects_underload() {
    let o = vnfscale(&["compare", &scenario("row1_underload")]);
    assert_ne!(o.status.code(), Some(0));
}
