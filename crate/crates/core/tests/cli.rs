use std::path::Path;
use std::process::{Command, Output};

fn workbench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_workbench"))
        .args(args)
        .current_dir(dir)
        .env_remove("WORKBENCH_EXHAUSTIVE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn construct_then_eval_the_lookup_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = workbench(&["construct", "--case", "3", "--n", "4", "--out", "spec.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(
        dir.path().join("inst.jsonl"),
        "{\"n\":4,\"f\":[2,2,3,1],\"pi\":[0,2,1,3],\"target\":2}\n",
    )
    .unwrap();
    let o = workbench(&["eval", "--spec", "spec.json", "--instances", "inst.jsonl", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "line,expected,got\n0,3,3\n");
}

#[test]
fn verify_reports_are_byte_stable_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |w: &str| {
        let args = ["verify", "--case", "5", "--n", "8", "--builder", "case5-two-layer", "--sample", "2000", "--seed", "9", "--workers", w];
        let o = workbench(&args, dir.path());
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn baseline_misses_give_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = workbench(&["verify", "--case", "5", "--n", "4", "--builder", "constant", "--sample", "500", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("case,n,trials,correct,accuracy,seed,wall_ms\n"));
}

#[test]
fn probe_matches_prediction() {
    let dir = tempfile::tempdir().unwrap();
    workbench(&["construct", "--case", "5", "--n", "4", "--two-layer", "--out", "two.json"], dir.path());
    let o = workbench(&["probe", "--spec", "two.json", "--n", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("none\n"));
}

#[test]
fn usage_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"n\": 4").unwrap();
    let o = workbench(&["probe", "--spec", "bad.json", "--n", "4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = workbench(&["probe", "--spec", "absent.json", "--n", "4"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = workbench(&["verify", "--case", "9", "--n", "4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = workbench(&["verify", "--case", "1", "--n", "6", "--exhaustive"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cap_override_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_workbench"))
        .args(["verify", "--case", "1", "--n", "6", "--exhaustive", "--format", "csv"])
        .env("WORKBENCH_EXHAUSTIVE_CAP", "6")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1,6,279936,279936,1.00000"));
}

#[test]
fn bounds_and_shatter() {
    let dir = tempfile::tempdir().unwrap();
    let o = workbench(&["bounds", "--n", "100"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["csize_lower_bound"], 222);
    let o = workbench(&["shatter", "--n", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "pass 16 labelings\n");
}
