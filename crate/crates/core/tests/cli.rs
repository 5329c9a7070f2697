// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn enbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enbs"))
        .args(args)
        .output()
        .expect("run enbs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../golden")
        .join(name)
}

#[test]
fn antiphase_unit_seeds_are_orthogonal() {
    let out = enbs(&["fidelity", "--alpha-mag", "1", "--dphi-sd", "pi"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = enbs(&["nsig", "--bad-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn mismatched_seed_flags_are_a_usage_error() {
    let out = enbs(&["fidelity", "--alpha-mag", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_parameters_are_a_domain_error() {
    let out = enbs(&["nsig", "--time", "1e-12", "--set", "kappa_s=-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn preset_scan_reproduces_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    let out = enbs(&["scan", "--preset", "fig4", "--out", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read(&path).unwrap(),
        fs::read(golden("fig4.csv")).unwrap()
    );
}

#[test]
fn dumped_config_reloads_to_the_same_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let first = enbs(&[
        "nsig",
        "--preset",
        "fig2",
        "--set",
        "arm1.seed_phase=pi/2",
        "--time",
        "0",
        "--dump-config",
    ]);
    assert!(first.status.success());
    let path = dir.path().join("params.toml");
    fs::write(&path, &first.stdout).unwrap();
    let second = enbs(&[
        "nsig",
        "--params",
        path.to_str().unwrap(),
        "--time",
        "0",
        "--dump-config",
    ]);
    assert!(second.status.success());
    assert_eq!(stdout(&first), stdout(&second));

    let direct = enbs(&[
        "nsig",
        "--preset",
        "fig2",
        "--set",
        "arm1.seed_phase=pi/2",
        "--time",
        "5e-11",
    ]);
    let reloaded = enbs(&[
        "nsig",
        "--params",
        path.to_str().unwrap(),
        "--time",
        "5e-11",
    ]);
    assert_eq!(stdout(&direct), stdout(&reloaded));
}
