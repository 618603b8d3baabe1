use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osgood-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn modulus_classifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["modulus", "--mu", "power:0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("modulus.json"));
    assert_eq!(v["verdict"]["class"], "non_osgood");
    let o = run(dir.path(), &["modulus", "--mu", "linear"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("modulus.json"))["verdict"]["class"], "osgood");
}

#[test]
fn weight_table_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["weight", "--mu", "linear", "--grid", "0:2:3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("weight.csv")).unwrap();
    let row: Vec<f64> = csv
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(row[0], 1.0);
    assert!((row[1] - 1.718282).abs() < 1e-6, "{csv}");
    let report = json(&dir.path().join("weight_report.json"));
    assert_eq!(report["passed"], true);

    let json_dir = tempfile::tempdir().unwrap();
    let o = run(json_dir.path(), &["weight", "--mu", "linear", "--grid", "0:2:3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&json_dir.path().join("weight.json"));
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn counterexample_default_passes_and_small_k0_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["counterexample"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["conditions.json", "field_checks.json", "field_grid.csv", "regularity.json"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }

    let bad = tempfile::tempdir().unwrap();
    let o = run(bad.path(), &["counterexample", "--k0", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("parabolicity") && err.contains("witness n = 1"), "{err}");
    assert!(!bad.path().join("regularity.json").exists());
    let conditions = json(&bad.path().join("conditions.json"));
    assert_eq!(conditions["passed"], false);
}

#[test]
fn configuration_errors_exit_two_without_artifacts() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("never");
    let o = run(&out, &["carleman", "--coeffs", "/nonexistent/coeffs.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = run(&out, &["counterexample", "--mu", "linear"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());

    let o = run(&out, &["weight", "--mu", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));

    let coeffs = root.path().join("coeffs.json");
    std::fs::write(&coeffs, "{\"n\": 1, \"m\": 1, \"T\": 1,,}").unwrap();
    let o = run(&out, &["carleman", "--coeffs", coeffs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 1") && err.contains("column"), "{err}");
    assert!(!out.exists());
}

#[test]
fn carleman_runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["carleman", "--profiles", "4", "--seed", "11"];
    let o = run(a.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut threaded = args.to_vec();
    threaded.extend(["--jobs", "3"]);
    assert_eq!(run(b.path(), &threaded).status.code(), Some(0));
    for name in ["carleman.json", "scan.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn report_summarizes_what_exists() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["weight", "--mu", "power:0.5", "--grid", "0:1.5:16"]).status.code(), Some(0));
    let o = run(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("weight") && summary.contains("PASS"), "{summary}");
    assert!(summary.contains("carleman") && summary.contains("not run"), "{summary}");

    assert_eq!(run(dir.path(), &["counterexample", "--k0", "1"]).status.code(), Some(1));
    let o = run(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(1));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("failing: a_sequence, parabolicity"), "{summary}");
}
