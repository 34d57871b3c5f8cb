#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

pub const BIN: &str = env!("CARGO_BIN_EXE_apartmentlab");

pub fn work_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).expect("test directory");
    dir
}

pub fn write_spec(
    dir: &Path,
    name: &str,
    eigenvalues: &[f64],
    multiplicities: &[usize],
    dim: usize,
    allow_assumption_violation: bool,
) -> PathBuf {
    let path = dir.join(name);
    let text = serde_json::to_string(&json!({
        "eigenvalues": eigenvalues,
        "multiplicities": multiplicities,
        "dim": dim,
        "allow_assumption_violation": allow_assumption_violation,
    }))
    .unwrap();
    std::fs::write(&path, text).unwrap();
    path
}

/// Run the binary; returns (exit code, stdout, stderr).
pub fn run(args: &[&str], envs: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    let output = cmd.output().expect("spawn apartmentlab");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8(output.stdout).expect("utf-8 stdout"),
        String::from_utf8(output.stderr).expect("utf-8 stderr"),
    )
}

pub fn report(stdout: &str) -> Value {
    serde_json::from_str(stdout).expect("report JSON")
}

pub fn counter(report: &Value, key: &str) -> u64 {
    report["counters"][key].as_u64().unwrap_or(0)
}

pub fn verdict(report: &Value) -> &str {
    report["verdict"].as_str().expect("verdict string")
}
