use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mplt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mplt")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = mplt(args);
    assert!(out.status.success(), "mplt {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

struct Fixture {
    dir: TempDir,
    railway: String,
    bounded: String,
    unbounded: String,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let path = |name, text| write(dir.path(), name, text).to_str().unwrap().to_string();
    Fixture {
        railway: path("railway.txt", "2 2\n2 5\n3 3\n"),
        bounded: path("bounded.txt", "3 3\n2 8 eps\n10 5 eps\n3 eps 9\n"),
        unbounded: path("unbounded.txt", "3 3\n2 8 eps\n10 5 eps\n3 eps 8\n"),
        dir,
    }
}

#[test]
fn analyze_reports_spectral_data() {
    let f = fixture();
    let v = json(&["--format", "json", "analyze", &f.railway]);
    assert_eq!(v["lambda"], "4");
    assert_eq!(v["cycleTime"], serde_json::json!(["4", "4"]));
    assert_eq!(v["class"], "boundedly_periodic");
    assert_eq!(v["cyclicity"], 2);
    let v = json(&["--format", "json", "analyze", &f.unbounded]);
    assert_eq!(v["class"], "unboundedly_periodic");
    assert_eq!(v["cyclicity"], Value::Null);
    let text = ok(&["analyze", &f.bounded]);
    assert!(text.contains("eigenvalue: 9"));
}

#[test]
fn transient_methods_agree() {
    let f = fixture();
    for method in ["power", "smt-cone", "smt-set"] {
        let v = json(&["--format", "json", "transient", &f.bounded, "--method", method]);
        assert_eq!((v["k0"].as_u64(), v["c"].as_u64()), (Some(2), Some(2)), "{method}");
        assert_eq!(v["status"], "found");
        assert!(v["millis"].as_f64().unwrap() >= 0.0);
    }
    let cone = write(f.dir.path(), "x0.txt", "3 1\n4\n2\n0\n");
    let v = json(&["--format", "json", "transient", &f.unbounded, "--cone", cone.to_str().unwrap()]);
    assert_eq!((v["k0"].as_u64(), v["c"].as_u64()), (Some(3), Some(2)));
    let v = json(&["--format", "json", "--bound", "40", "transient", &f.unbounded]);
    assert_eq!(v["status"], "bound_exceeded");
}

#[test]
fn transient_on_region() {
    let f = fixture();
    let region = write(f.dir.path(), "region.txt", "x1 - x2 >= 1 & x1 - x2 <= 1\n");
    let v = json(&["--format", "json", "transient", &f.railway, "--method", "smt-set", "--region", region.to_str().unwrap()]);
    assert_eq!((v["k0"].as_u64(), v["c"].as_u64()), (Some(0), Some(1)));
    let empty = write(f.dir.path(), "empty.txt", "x1 - x2 >= 1 & x2 - x1 >= 0\n");
    let out = mplt(&["transient", &f.railway, "--method", "smt-set", "--region", empty.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsatisfiable"));
}

#[test]
fn synth_reports_emptiness_and_script() {
    let f = fixture();
    let v = json(&["--format", "json", "synth", &f.railway, "--p", "2"]);
    assert_eq!(v["empty"], false);
    assert!(v["smtlib"].as_str().unwrap().starts_with("(set-logic QF_RDL)"));
    let v = json(&["--format", "json", "synth", &f.railway, "--p", "3"]);
    assert_eq!(v["empty"], true);
    let v = json(&["--format", "json", "synth", &f.railway, "--p", "0", "--q", "3"]);
    assert_eq!(v["empty"], true);
    let v = json(&["--format", "json", "synth", &f.unbounded, "--p", "3", "--q", "2", "--cyclicity", "2"]);
    assert_eq!(v["empty"], false);
    let out = mplt(&["synth", &f.unbounded, "--p", "1"]);
    assert!(!out.status.success(), "reducible matrix needs --cyclicity");
}

#[test]
fn gen_is_seeded() {
    let a = ok(&["--seed", "5", "gen", "--n", "4", "--m", "2", "--count", "3"]);
    assert_eq!(a, ok(&["--seed", "5", "gen", "--n", "4", "--m", "2", "--count", "3"]));
    assert_ne!(a, ok(&["--seed", "6", "gen", "--n", "4", "--m", "2", "--count", "3"]));
    let dir = tempfile::tempdir().unwrap();
    ok(&["--seed", "5", "gen", "--n", "4", "--m", "2", "--count", "3", "--out", dir.path().to_str().unwrap()]);
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 3);
    let first = dir.path().join("matrix_0000.txt");
    let v = json(&["--format", "json", "analyze", first.to_str().unwrap()]);
    assert_eq!(v["class"], "boundedly_periodic");
    assert!(!mplt(&["gen", "--n", "3", "--m", "4"]).status.success());
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let summary = dir.path().join("summary.json");
    let stdout = ok(&[
        "--seed", "3", "--jobs", "2", "--format", "csv", "bench", "--n", "4", "--m", "2", "--count", "8",
        "--csv", csv.to_str().unwrap(), "--json", summary.to_str().unwrap(),
    ]);
    assert!(stdout.starts_with("id,n,m,k0,c,k0_plus_c,t_power_us,t_smt_us,refinements\n"));
    assert_eq!(stdout.lines().count(), 9);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 9);
    let v: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["instances"], 8);
    let pretty = ok(&["--seed", "3", "bench", "--n", "3", "--m", "2", "--count", "4"]);
    assert!(pretty.contains("instances: 4"));
}

#[test]
fn external_solver_flag() {
    let Some(z3) = std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths).map(|d| d.join("z3")).find(|p| p.is_file())
    }) else {
        eprintln!("z3 not found on PATH; skipping");
        return;
    };
    let f = fixture();
    let z3 = z3.to_str().unwrap();
    let v = json(&["--format", "json", "--external-solver", z3, "transient", &f.bounded, "--method", "smt-set"]);
    assert_eq!((v["k0"].as_u64(), v["c"].as_u64()), (Some(2), Some(2)));
    let v = json(&["--format", "json", "--external-solver", z3, "synth", &f.railway, "--p", "3"]);
    assert_eq!(v["empty"], true);
}

#[test]
fn reports_bad_input() {
    let f = fixture();
    let bad = write(f.dir.path(), "bad.txt", "2 2\n1 x\n0 0\n");
    let out = mplt(&["analyze", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt"));
    assert!(!mplt(&["analyze", "/nonexistent/matrix.txt"]).status.success());
    assert!(!mplt(&["--format", "csv", "analyze", &f.railway]).status.success());
    assert!(!mplt(&["transient", &f.railway, "--region", bad.to_str().unwrap()]).status.success());
}
