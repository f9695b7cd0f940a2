use loomsched_bench::{read_report, Format};
use std::process::Command;

fn bench() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bench"));
    c.env_remove("LOOMSCHED_THREADS");
    c
}

#[test]
fn writes_csv_report_and_cleans_partial_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let status = bench()
        .args(["--app", "synth", "--n", "20000", "--beta", "400", "--policy", "guided", "--chunk", "1"])
        .args(["--threads", "1,2", "--reps", "2", "--pin", "off", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(matches!(status.code(), Some(0) | Some(2)), "{status:?}");
    let report = read_report(&out, Format::Csv).unwrap();
    assert_eq!(report.runs.len(), 4);
    assert!(report.metrics.iter().any(|m| m.metric == "speedup_guided" && m.value == 1.0));
    assert!(!dir.path().join("r.csv.partial").exists());
}

#[test]
fn thread_list_from_environment_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = bench()
        .env("LOOMSCHED_THREADS", "3")
        .args(["--app", "bfs", "--graph", "uniform", "--nv", "5000", "--policy", "ich", "--epsilon", "0.25"])
        .args(["--polarity", "figure", "--reps", "1", "--pin", "off", "--trace", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(matches!(status.code(), Some(0) | Some(2)));
    let report = read_report(&out, Format::Json).unwrap();
    assert_eq!(report.runs.len(), 1);
    assert_eq!(report.runs[0].threads, 3);
    assert_eq!(report.runs[0].param, "0.25:figure");
    let trace = std::fs::read_to_string(dir.path().join("r.trace.tsv")).unwrap();
    assert!(trace.starts_with("# app=bfs"));
}

#[test]
fn tiny_cells_are_flagged_with_exit_code_two() {
    let status = bench()
        .args(["--n", "10", "--beta", "1", "--policy", "static", "--threads", "1", "--reps", "1", "--pin", "off"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.starts_with("app,input,policy,param,threads,rep,seconds"));
}

#[test]
fn bad_arguments_fail() {
    let s = bench().args(["--policy", "fifo"]).status().unwrap();
    assert_eq!(s.code(), Some(2));
    let s = bench().args(["--app", "spmv", "--input", "/missing.mtx", "--threads", "1"]).status().unwrap();
    assert_eq!(s.code(), Some(1));
}
