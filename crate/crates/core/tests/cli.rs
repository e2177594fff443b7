//! The command line: exit codes, artifacts, job files, goldens and determinism.

mod common;

use std::fs;

use common::{golden_dir, run, run_suite};
use serde_json::Value;

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn json(path: &std::path::Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn inspect_hopf_has_unit_curvature_columns() {
    let d = tmp();
    let r = run(&["inspect", "--chart", "theta3_hopf.json", "--grid", "10", "--out", "o"], d.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut rdr = csv::Reader::from_path(d.path().join("o/inspect.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let ks: Vec<usize> = headers.iter().enumerate().filter(|(_, h)| h.starts_with("K_")).map(|(i, _)| i).collect();
    assert_eq!(ks.len(), 5);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        for &i in &ks {
            let k: f64 = rec[i].parse().unwrap();
            assert!((k - 1.0).abs() < 1e-5, "{} = {k}", &headers[i]);
        }
        rows += 1;
    }
    assert_eq!(rows, 1000);
}

#[test]
fn inspect_const_is_flat() {
    let d = tmp();
    let r = run(&["inspect", "--chart", "theta_const.json", "--out", "o"], d.path());
    assert_eq!(r.code, 0);
    let mut rdr = csv::Reader::from_path(d.path().join("o/inspect.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        for (h, v) in headers.iter().zip(rec.iter()) {
            if h.starts_with("K_") || h.starts_with("scalar") || h.starts_with("Gamma") {
                assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{h}");
            }
        }
    }
}

#[test]
fn inspect_wobble_has_oracle_and_discrepancy_columns() {
    let d = tmp();
    assert_eq!(run(&["inspect", "--chart", "theta_wobble.json", "--grid", "4", "--out", "o"], d.path()).code, 0);
    let mut rdr = csv::Reader::from_path(d.path().join("o/inspect.csv")).unwrap();
    let h = rdr.headers().unwrap().clone();
    let col = |name: &str| h.iter().position(|x| x == name).unwrap();
    let (s, o, du) = (col("scalar"), col("scalar_oracle"), col("discrepancy_unit_coefficient"));
    let mut populated = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let (a, b): (f64, f64) = (rec[s].parse().unwrap(), rec[o].parse().unwrap());
        assert!((a - b).abs() < 1e-4);
        if rec[du].parse::<f64>().unwrap() > 0.0 {
            populated += 1;
        }
    }
    assert!(populated > 0);
    let summary = json(&d.path().join("o/inspect.json"));
    assert!(summary["unit_coefficient_flagged_points"].as_u64().unwrap() > 0);
}

#[test]
fn build_umbilical_outputs_and_codes() {
    let d = tmp();
    let r = run(&["build-umbilical", "--f", "cos", "--theta0", "pi/6", "--arclen", "2", "--out", "o"], d.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    for f in ["profile.csv", "surface.mesh", "umbilicity.json", "umbilicity.csv"] {
        assert!(d.path().join("o").join(f).is_file(), "{f}");
    }
    let rep = json(&d.path().join("o/umbilicity.json"));
    assert!(rep["umbilicity"]["deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(
        fs::read_to_string(d.path().join("o/profile.csv")).unwrap().lines().next().unwrap(),
        "s,x0,x1,theta,c_drift"
    );

    let r = run(&["build-umbilical", "--f", "one", "--theta0", "0", "--out", "z"], d.path());
    assert_eq!(r.code, 0);
    let rep = json(&d.path().join("z/umbilicity.json"));
    assert!(rep["profile"]["class"].as_str().unwrap().starts_with("slice-equivalent"));
    assert!(rep["umbilicity"]["mean_eigenvalue"].as_array().unwrap().iter().all(|v| v.as_f64() == Some(0.0)));

    let r = run(&["build-umbilical", "--f", "cos", "--theta0", "pi/6", "--step", "0.5", "--out", "b"], d.path());
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("drift"));
}

#[test]
fn build_umbilical_output_overrides() {
    let d = tmp();
    let r = run(
        &["build-umbilical", "--theta0", "0.4", "--arclen", "0.5", "--profile-out", "p.csv", "--mesh-out", "m.txt", "--report-out", "r.json", "--out", "o"],
        d.path(),
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    for f in ["p.csv", "m.txt", "r.json", "o/umbilicity.csv"] {
        assert!(d.path().join(f).is_file(), "{f}");
    }
    let r = run(&["build-umbilical", "--theta0", "0.4", "--profile-out", "x", "--report-out", "x"], d.path());
    assert_eq!(r.code, 2);
}

#[test]
fn checks() {
    let d = tmp();
    let cases: &[(&[&str], i32)] = &[
        (&["check", "smoothness", "--theta", "hopf", "--b", "1.5707963", "--target", "s3"], 0),
        (&["check", "smoothness", "--theta", "hopf", "--b", "pi/2", "--target", "s2xr"], 5),
        (&["check", "killing", "--chart", "theta_wobble.json", "--field", "dy"], 0),
        (&["check", "killing", "--chart", "theta_wobble.json", "--field", "dx"], 5),
        (&["check", "tg-surfaces", "--chart", "theta_bump.json", "--x0", "0"], 0),
        (&["check", "tg-surfaces", "--chart", "theta_bump.json", "--x0", "0.3"], 5),
        (&["check", "r3", "--theta", "bump"], 0),
        (&["check", "r3", "--theta", "hopf", "--span", "1.5"], 5),
        (&["check", "submersion", "--theta", "hopf"], 0),
        (&["check", "lemma1"], 0),
    ];
    for (args, code) in cases {
        let mut argv = args.to_vec();
        argv.extend(["--out", "o"]);
        let r = run(&argv, d.path());
        assert_eq!(r.code, *code, "{args:?}: {}{}", r.stdout, r.stderr);
        let name = format!("check-{}.json", args[1]);
        assert!(d.path().join("o").join(name).is_file());
        assert!(r.stdout.contains("PASS") || r.stdout.contains("FAIL"));
    }
    let rep = json(&d.path().join("o/check-killing.json"));
    assert!(rep["max_defect"].as_f64().unwrap() < 1e-10 || rep["is_killing"] == false);
}

#[test]
fn input_errors_exit_2() {
    let d = tmp();
    fs::write(d.path().join("bad.json"), r#"{"schema": 7, "metric": {"kind": "theta3", "theta": {"form": {"kind": "constant", "value": 0.5}}}}"#).unwrap();
    let cases: &[&[&str]] = &[
        &["inspect", "--chart", "bad.json"],
        &["inspect", "--chart", "no-such-chart"],
        &["inspect", "--chart", "hopf", "--tol", "0"],
        &["inspect", "--chart", "hopf", "--bogus", "1"],
        &["check", "killing", "--chart", "hopf", "--field", "dw"],
        &["geodesic", "--chart", "hopf", "--point", "0.5,0", "--dir", "1,0,0"],
        &["run", "--config", "missing.json"],
    ];
    for args in cases {
        let r = run(args, d.path());
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
        assert!(!r.stderr.is_empty());
    }
    let r = run(&["inspect", "--chart", "bad.json"], d.path());
    assert!(r.stderr.contains("--chart") && r.stderr.contains('7'), "{}", r.stderr);
}

#[test]
fn domain_errors_exit_3() {
    let d = tmp();
    let r = run(&["geodesic", "--chart", "hopf", "--point", "2,0,0", "--dir", "1,0,0", "--out", "o"], d.path());
    assert_eq!(r.code, 3, "{}", r.stderr);
    let r = run(&["conformal", "--f", "cos", "--interval", "-3,3", "--out", "o"], d.path());
    assert_eq!(r.code, 3, "{}", r.stderr);
}

#[test]
fn job_files() {
    let d = tmp();
    fs::write(
        d.path().join("job.json"),
        r#"{"command": "check", "check": "killing", "chart": "theta_wobble.json", "field": "dz", "out": "o"}"#,
    )
    .unwrap();
    let r = run(&["run", "--config", "job.json"], d.path());
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(d.path().join("o/check-killing.json").is_file());

    fs::write(d.path().join("typo.json"), r#"{"command": "inspect", "chart": "hopf", "gird": 3}"#).unwrap();
    let r = run(&["run", "--config", "typo.json"], d.path());
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("gird"));

    let chart = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/theta_bump.json")).unwrap();
    let job = format!(r#"{{"command": "check", "check": "tg-surfaces", "chart": {chart}, "x0": 0, "out": "t"}}"#);
    fs::write(d.path().join("inline.json"), job).unwrap();
    assert_eq!(run(&["run", "--config", "inline.json"], d.path()).code, 0);
}

#[test]
fn bundled_data_matches_presets() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for name in umbilic::presets::THETA_PRESETS {
        let file = umbilic::presets::chart_file(name).unwrap();
        let text = fs::read_to_string(dir.join(file)).unwrap();
        assert_eq!(umbilic::MetricChart::from_json(&text).unwrap(), umbilic::presets::chart(name).unwrap(), "{file}");
    }
    for name in umbilic::presets::WARP_PRESETS {
        let text = fs::read_to_string(dir.join(format!("f_{name}.json"))).unwrap();
        assert_eq!(umbilic::FunctionSpec1D::from_json(&text).unwrap(), umbilic::presets::warp(name).unwrap());
    }
}

/// Set `UMBILIC_BLESS=1` to rewrite the stored goldens.
#[test]
fn golden_suite() {
    let d = tmp();
    let (files, codes) = run_suite(d.path());
    for (name, code) in &codes {
        assert_eq!(*code, 0, "{name}");
    }
    let root = golden_dir();
    if std::env::var_os("UMBILIC_BLESS").is_some() {
        let _ = fs::remove_dir_all(&root);
        for (key, bytes) in &files {
            let path = root.join(key);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, bytes).unwrap();
        }
        return;
    }
    let mut stored = 0;
    for (key, bytes) in &files {
        let path = root.join(key);
        let expected = fs::read(&path).unwrap_or_else(|_| panic!("missing golden {key}; run with UMBILIC_BLESS=1"));
        assert!(expected == *bytes, "{key} differs from its golden");
        stored += 1;
    }
    assert_eq!(stored, walk(&root), "stale files under tests/golden");
}

fn walk(dir: &std::path::Path) -> usize {
    fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| if e.path().is_dir() { walk(&e.path()) } else { 1 })
        .sum()
}

#[test]
fn help_and_version_exit_0() {
    let d = tmp();
    assert_eq!(run(&["--help"], d.path()).code, 0);
    assert_eq!(run(&["--version"], d.path()).code, 0);
    assert_eq!(run(&[], d.path()).code, 2);
}
