//! CLI exit codes and artifact behavior beyond the happy path.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ruled")
}

fn write_spec(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const HELICOID: &str = r#"{
    "invariants": {"builtin": "helicoid", "params": {"delta0": 1.0}},
    "domain": [0.0, 6.283185307179586],
    "v_range": [-2.0, 2.0],
    "grid": [16, 8]
}"#;

#[test]
fn analyze_writes_csv_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "helicoid.json", HELICOID);
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out_dir = dir.path().join(format!("out{run}"));
        let status = Command::new(bin())
            .args(["analyze", "--spec"])
            .arg(&spec)
            .arg("--out")
            .arg(&out_dir)
            .status()
            .unwrap();
        assert!(status.success());
        let csv = std::fs::read(out_dir.join("surface.csv")).unwrap();
        let text = String::from_utf8(csv.clone()).unwrap();
        assert!(text.starts_with("u,v,w,g11,g12,g22,h11,h12,h22,K,H,k1,k2\n"));
        assert_eq!(text.lines().count(), 1 + 16 * 8);
        assert!(!text.contains('\r'));
        outputs.push(csv);
    }
    assert_eq!(outputs[0], outputs[1], "CSV must be byte-identical across runs");
}

#[test]
fn missing_spec_file_exits_2() {
    let out = Command::new(bin())
        .args(["analyze", "--spec", "/nonexistent/spec.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_spec_exits_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "bad.json",
        r#"{"invariants": {"k": "1+", "delta": "1", "lambda": "0"},
            "domain": [0.0, 1.0], "v_range": [-1.0, 1.0], "grid": [8, 8]}"#,
    );
    let out = Command::new(bin())
        .args(["analyze", "--spec"])
        .arg(&spec)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("invariants.k"), "stderr: {stderr}");
}

#[test]
fn torsal_profile_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "torsal.json",
        r#"{"invariants": {"k": "0", "delta": "sin(u)", "lambda": "0"},
            "domain": [0.0, 3.141592653589793], "v_range": [-1.0, 1.0], "grid": [8, 8]}"#,
    );
    let out = Command::new(bin())
        .args(["analyze", "--spec"])
        .arg(&spec)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reconstruct_rejects_parametrization_specs() {
    let dir = tempfile::tempdir().unwrap();
    // helicoid in raw form: s = (0, 0, u), e = (cos u, sin u, 0)
    let spec = write_spec(
        dir.path(),
        "raw.json",
        r#"{"parametrization": {"directrix": ["0", "0", "u"],
                                 "direction": ["cos(u)", "sin(u)", "0"]},
            "domain": [0.0, 6.283185307179586], "v_range": [-2.0, 2.0], "grid": [16, 8]}"#,
    );
    let out = Command::new(bin())
        .args(["reconstruct", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parametrization_spec_classifies_like_the_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "raw.json",
        r#"{"parametrization": {"directrix": ["0", "0", "u"],
                                 "direction": ["cos(u)", "sin(u)", "0"]},
            "domain": [0.0, 6.283185307179586], "v_range": [-2.0, 2.0], "grid": [64, 8]}"#,
    );
    let out = Command::new(bin())
        .args(["classify", "--spec"])
        .arg(&spec)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("WENDELFLAECHE"), "stdout: {stdout}");
}

#[test]
fn verify_all_builtins_exits_0() {
    let out = Command::new(bin())
        .args(["verify", "--all-builtins"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["helicoid", "edlinger", "const_drall_orthoid", "const_drall_conoid"] {
        assert!(stdout.contains(&format!("{name}: ok")), "stdout: {stdout}");
    }
}

#[test]
fn verify_single_spec_reports_checks() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "helicoid.json", HELICOID);
    let out = Command::new(bin())
        .args(["verify", "--spec"])
        .arg(&spec)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("ok  invariant round trip"), "stderr: {stderr}");
}

#[test]
fn bad_grid_flag_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "helicoid.json", HELICOID);
    let out = Command::new(bin())
        .args(["analyze", "--grid", "64", "--spec"])
        .arg(&spec)
        .output()
        .unwrap();
    assert_ne!(out.status.code(), Some(0));
}
