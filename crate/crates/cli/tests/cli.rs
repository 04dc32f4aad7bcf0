//! Black-box tests of the `mixnl` binary: output files, determinism of the
//! CSV bodies, overrides and the preset generator.

use std::path::Path;
use std::process::Command;

fn mixnl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mixnl"))
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

fn run_solve(dir: &Path, extra: &[&str]) {
    let mut cmd = mixnl();
    cmd.args([
        "solve-mp",
        "--set",
        "mesh.n_in=24",
        "--set",
        "mesh.n_ext=8",
        "--set",
        "mesh.collar_radius=5.0",
        "--set",
        "lambda=0.25",
        "--set",
        "n_eigs=4",
    ])
    .arg("--out")
    .arg(dir)
    .args(extra)
    .env("MIXNL_THREADS", "2");
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "solve-mp failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn solve_outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_solve(a.path(), &[]);
    run_solve(b.path(), &[]);
    for name in ["eigs.csv", "solution.csv", "trace.csv"] {
        assert_eq!(
            read(a.path(), name),
            read(b.path(), name),
            "{name} differs between identical runs"
        );
    }
    // report.json exists and carries the solved level
    let report: serde_json::Value =
        serde_json::from_slice(&read(a.path(), "report.json")).unwrap();
    assert_eq!(report["branch"], "mountain_pass");
    assert!(report["solution"]["level"].as_f64().unwrap() > 0.0);
}

#[test]
fn assemble_dumps_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let out = mixnl()
        .args([
            "assemble",
            "--set",
            "mesh.n_in=16",
            "--set",
            "mesh.n_ext=4",
            "--set",
            "mesh.collar_radius=4.0",
        ])
        .arg("--out")
        .arg(dir.path())
        .arg("--dump-matrices")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["mass.coo", "stiffness.coo", "gagliardo.coo"] {
        let body = read(&dir.path().join("matrices"), name);
        assert!(!body.is_empty());
    }
    let report: serde_json::Value =
        serde_json::from_slice(&read(dir.path(), "report.json")).unwrap();
    assert_eq!(report["n_dofs"].as_u64().unwrap(), 25);
}

#[test]
fn branch_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    // lambda = 2 lies in the linking regime, solve-mp must refuse
    let out = mixnl()
        .args([
            "solve-mp",
            "--set",
            "mesh.n_in=16",
            "--set",
            "mesh.n_ext=4",
            "--set",
            "mesh.collar_radius=4.0",
            "--set",
            "lambda=2.0",
        ])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("solve-link"), "unexpected stderr: {err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = mixnl()
        .args(["eigs", "--set", "mesh.n_inn=16"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn preset_roundtrips_through_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cor1.toml");
    let out = mixnl()
        .args(["preset", "cor1", "--alpha", "1.0", "--beta", "0.5", "--s", "0.5"])
        .arg("--out")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // the emitted file must load and solve 'eigs' as-is (on a coarse mesh)
    let out = mixnl()
        .arg("eigs")
        .arg("--config")
        .arg(&cfg)
        .args([
            "--set",
            "mesh.n_in=16",
            "--set",
            "mesh.n_ext=4",
            "--set",
            "mesh.collar_radius=4.0",
        ])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let eigs = String::from_utf8(read(dir.path(), "eigs.csv")).unwrap();
    assert!(eigs.starts_with("k,lambda_tilde,lambda"));
}
