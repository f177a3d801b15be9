//! End-to-end checks of the `nozzleflow` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nozzleflow::report::read_snapshot_csv;
use serde_json::Value;

fn nozzleflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nozzleflow"))
        .args(args)
        .env("NOZZLEFLOW_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn read_report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn well_balanced_run_keeps_the_reference_steady_state() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("wb");
    let o = nozzleflow(&[
        "run", "--case", "paper-stationary", "--scheme", "well-balanced", "--cells", "1000",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_report(&out);
    let dev = report["series"]["max_deviation"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .fold(0.0f64, f64::max);
    assert!(dev <= 1e-9, "{dev}");
    assert_eq!(report["config"]["case"], "paper-stationary");
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn baseline_run_reports_a_deviation_without_failing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lf");
    let o = nozzleflow(&[
        "run", "--case", "paper-stationary", "--scheme", "lf-central", "--cells", "1000",
        "--steps", "400", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let line = stdout.lines().find(|l| l.starts_with("max deviation")).unwrap();
    let dev: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(dev > 1e-3, "{line}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let go = |name: &str| {
        let out = tmp.path().join(name);
        let o = nozzleflow(&[
            "run", "--case", "random", "--seed", "11", "--cells", "200", "--steps", "60",
            "--snapshot-every", "20", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
        (dir_contents(&out), o.stdout)
    };
    let (a, sa) = go("a");
    let (b, sb) = go("b");
    assert_eq!(a, b);
    assert_eq!(sa, sb);
    let names: Vec<&str> = a.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["report.json", "snap_0.csv", "snap_20.csv", "snap_40.csv", "snap_60.csv"]);
}

#[test]
fn snapshot_csv_and_report_follow_the_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = nozzleflow(&[
        "run", "--case", "shock-nozzle", "--cells", "100", "--t-end", "0.1", "--snapshot-every", "10",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_report(&out);
    for key in ["config", "snapshots", "series", "violations", "resonance_events", "error"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    let snaps = report["snapshots"].as_array().unwrap();
    let mut prev_t = -1.0;
    for s in snaps {
        let t = s["t"].as_f64().unwrap();
        assert!(t > prev_t);
        prev_t = t;
        let rows = read_snapshot_csv(&fs::read_to_string(out.join(s["file"].as_str().unwrap())).unwrap()).unwrap();
        assert_eq!(rows.len(), 100);
        assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
        assert!(rows.iter().all(|r| r[2] > 0.0 && r[1] > 0.0));
    }
    assert_eq!(prev_t, 0.1);
    let series = &report["series"];
    let n = series["t"].as_array().unwrap().len();
    for key in ["step", "min_rho", "min_s", "max_entropy_residual", "max_deviation"] {
        assert_eq!(series[key].as_array().unwrap().len(), n, "{key}");
    }
}

#[test]
fn bad_configuration_exits_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--scheme", "godunov"],
        vec!["run", "--case", "unknown-case"],
        vec!["run", "--cells", "1"],
        vec!["frobnicate"],
    ] {
        let out = tmp.path().join("x");
        let mut full = args.clone();
        full.extend(["--out", out.to_str().unwrap()]);
        if args[0] != "run" {
            full.truncate(1);
        }
        let o = nozzleflow(&full);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "name = 3").unwrap();
    let o = nozzleflow(&["run", "--case-file", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_cfl_violation_exits_with_code_one_and_keeps_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cfl");
    let o = nozzleflow(&[
        "run", "--case", "paper-stationary", "--cells", "100", "--lambda", "5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report = read_report(&out);
    assert!(report["error"].as_str().unwrap().contains("CFL"), "{}", report["error"]);
}

#[test]
fn case_files_round_trip_through_the_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nozzleflow(&["cases", "rest-nozzle"]);
    assert_eq!(o.status.code(), Some(0));
    let file = tmp.path().join("rest.toml");
    fs::write(&file, &o.stdout).unwrap();
    let out = tmp.path().join("rest");
    let o = nozzleflow(&[
        "run", "--case-file", file.to_str().unwrap(), "--steps", "50", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_snapshot_csv(&fs::read_to_string(out.join("snap_50.csv")).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r[3].abs() <= 1e-12));
}

#[test]
fn verify_prints_a_deterministic_table() {
    let a = nozzleflow(&["verify", "--samples", "200", "--seed", "7"]);
    let b = nozzleflow(&["verify", "--samples", "200", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.matches("PASS").count(), 4, "{text}");
}

#[test]
fn sweep_writes_one_directory_per_resolution() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let o = nozzleflow(&[
        "sweep", "--case", "paper-stationary", "--scheme", "lf-central", "--cells", "50,100", "--steps", "20",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    let cells: Vec<u64> = summary.as_array().unwrap().iter().map(|e| e["cells"].as_u64().unwrap()).collect();
    assert_eq!(cells, [50, 100]);
    assert!(out.join("cells_50/report.json").exists() && out.join("cells_100/snap_20.csv").exists());
}
