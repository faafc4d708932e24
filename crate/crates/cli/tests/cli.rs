use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn potentia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_potentia")).args(args).output().expect("spawn potentia")
}

fn run(name: &str, out: &Path, extra: &[&str]) -> Output {
    let file = scenario(name);
    let mut args = vec!["run", file.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    potentia(&args)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_accepts_every_shipped_scenario() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let o = potentia(&["validate", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn malformed_scenario_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "pipeline = \"verdict\"\n[domain]\nshape = \"hexagon\"\n").unwrap();
    for cmd in ["validate", "run"] {
        let o = potentia(&[cmd, bad.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
    }
    let o = potentia(&["run", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(&bad, "pipeline = \"verdict\"\nbogus = 1\n").unwrap();
    assert_eq!(potentia(&["validate", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn missing_section_is_a_scenario_error() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("s.toml");
    fs::write(&f, "pipeline = \"verdict\"\n[domain]\nshape = \"disk\"\ncenter = [0.0, 0.0]\nradius = 1.0\n").unwrap();
    assert_eq!(potentia(&["validate", f.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn hypothesis_failure_exits_1_after_writing_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("radial-growth", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&tmp.path().join("report.json"));
    assert_eq!(r["verdict"], "HYPOTHESIS_FAILED(condition6)");
    assert_eq!(r["condition6"]["value"], "inf");
}

#[test]
fn gluing_violation_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run("gluing-violated", tmp.path(), &[]).status.code(), Some(1));
}

#[test]
fn divergent_zeros_force_the_trivial_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("blaschke-divergent", tmp.path(), &["--grid", "128"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&tmp.path().join("report.json"));
    assert_eq!(r["verdict"], "FORCED_TRIVIAL");
    assert_eq!(r["condition7b"]["classification"], "DIVERGENT");
    assert_eq!(r["condition7b"]["limit"], "inf");
    assert!(r["witness"].is_null());
    let csv = fs::read_to_string(tmp.path().join("test_function.csv")).unwrap();
    assert!(csv.starts_with("x,y,value\n"));
    assert!(tmp.path().join("zeros.csv").exists());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for name in ["blaschke-convergent", "poisson-jensen"] {
        let (da, db) = (a.path().join(name), b.path().join(name));
        assert!(run(name, &da, &["--grid", "128"]).status.success());
        assert!(run(name, &db, &["--grid", "128"]).status.success());
        assert_eq!(fs::read(da.join("report.json")).unwrap(), fs::read(db.join("report.json")).unwrap(), "{name}");
    }
}

#[test]
fn grid_override_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run("continuation", tmp.path(), &["--grid", "96"]).status.success());
    assert_eq!(json(&tmp.path().join("report.json"))["provenance"]["cells"], 96);
}

#[test]
fn green_study_converges() {
    let tmp = tempfile::tempdir().unwrap();
    let file = scenario("green-study");
    let o = potentia(&["study", file.to_str().unwrap(), "--levels", "64,128,256", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&tmp.path().join("study.json"));
    assert_eq!(r["monotone"], true);
    for order in r["orders"].as_array().unwrap() {
        assert!(order.as_f64().unwrap() >= 0.9, "{order}");
    }
    let csv = fs::read_to_string(tmp.path().join("study.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn bad_levels_are_rejected() {
    let file = scenario("green-study");
    let o = potentia(&["study", file.to_str().unwrap(), "--levels", "64,abc"]);
    assert_eq!(o.status.code(), Some(2));
}
