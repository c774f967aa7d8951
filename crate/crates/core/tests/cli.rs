// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rram-wv"))
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 8);
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = bin()
        .args(["run", "--config", "/nonexistent/wv.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/wv.cfg"), "{stderr}");
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "trials = 2\nbogus_key = 1\n").unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));
}

#[test]
fn fixed_seed_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["run", "--seed", "7", "--trials", "3"];
    let ra = run_in(a.path(), &args);
    let rb = run_in(b.path(), &args);
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(ra.stdout, rb.stdout);
    for name in ["summary.csv", "iterations.csv", "summary.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }

    let seq = tempfile::tempdir().unwrap();
    let rs = run_in(seq.path(), &["run", "--seed", "7", "--trials", "3", "--sequential"]);
    assert!(rs.status.success());
    assert_eq!(
        std::fs::read(a.path().join("summary.csv")).unwrap(),
        std::fs::read(seq.path().join("summary.csv")).unwrap()
    );
}

#[test]
fn json_format_and_sweep_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["sweep-tau", "--trials", "2", "--grid", "2,4", "--format", "json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().map(Vec::len), Some(2));
    assert!(dir.path().join("manifest.json").is_file());
}
