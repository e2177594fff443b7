//! The CLI golden suite shared by the CLI tests and the acceptance run.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

/// `(name, arguments)`; every job also gets `--out <dir>/<name>`.
pub const GOLDEN_JOBS: &[(&str, &[&str])] = &[
    ("inspect-hopf", &["inspect", "--chart", "theta3_hopf.json", "--grid", "3"]),
    ("inspect-wobble", &["inspect", "--chart", "theta_wobble.json", "--grid", "3", "--seed", "11"]),
    ("build-cos", &["build-umbilical", "--f", "cos", "--theta0", "pi/6", "--arclen", "2", "--grid", "4"]),
    ("build-one", &["build-umbilical", "--f", "one", "--theta0", "0", "--arclen", "1", "--step", "0.01", "--grid", "3"]),
    ("conformal-exp", &["conformal", "--f", "exp", "--interval", "-1,1", "--t0", "0"]),
    ("smoothness-hopf", &["check", "smoothness", "--theta", "hopf", "--b", "1.5707963", "--target", "s3"]),
    ("r3-bump", &["check", "r3", "--theta", "bump", "--grid", "401", "--span", "10"]),
    ("submersion-wobble", &["check", "submersion", "--theta", "wobble", "--grid", "9"]),
    ("tg-bump", &["check", "tg-surfaces", "--chart", "theta_bump.json", "--x0", "0"]),
    ("killing-wobble", &["check", "killing", "--chart", "theta_wobble.json", "--field", "dy", "--grid", "3"]),
    ("lemma1", &["check", "lemma1", "--grid", "3", "--seed", "5"]),
    ("geodesic-hopf", &["geodesic", "--chart", "hopf", "--point", "pi/4,0,0", "--dir", "0,1,0", "--length", "0.5", "--step", "0.01"]),
];

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_umbilic")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str], cwd: &Path) -> Run {
    let out = Command::new(bin())
        .args(args)
        .current_dir(cwd)
        .env("UMBILIC_LOG", "quiet")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub type SuiteOutput = (BTreeMap<String, Vec<u8>>, Vec<(String, i32)>);

/// Runs every golden job into `root/<name>` and returns the produced files, keyed by
/// `<name>/<file>`, together with each job's exit code.
pub fn run_suite(root: &Path) -> SuiteOutput {
    let mut files = BTreeMap::new();
    let mut codes = Vec::new();
    for (name, args) in GOLDEN_JOBS {
        let dir = root.join(name);
        let mut argv: Vec<&str> = args.to_vec();
        let dir_s = dir.to_string_lossy().into_owned();
        argv.push("--out");
        argv.push(&dir_s);
        let r = run(&argv, root);
        codes.push((name.to_string(), r.code));
        for entry in std::fs::read_dir(&dir).into_iter().flatten().flatten() {
            let key = format!("{name}/{}", entry.file_name().to_string_lossy());
            files.insert(key, std::fs::read(entry.path()).expect("readable"));
        }
    }
    (files, codes)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}
