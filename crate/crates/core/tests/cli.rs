use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_parageo");
const SPHERE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/sphere.json");

fn parageo(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("PARAGEO_STEP_OVERRIDE")
        .output()
        .unwrap()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["integrate", "tensors", "transport"] {
        let a = parageo(&[cmd, SPHERE], dir.path());
        let b = parageo(&[cmd, SPHERE], dir.path());
        assert_eq!(
            a.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{cmd}");
        assert!(!a.stdout.contains(&b'\r'));
    }
}

#[test]
fn integrate_writes_csv_then_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = String::from_utf8(parageo(&["integrate", SPHERE], dir.path()).stdout).unwrap();
    assert!(out.starts_with("t,x1,x2,x3,v1,v2,v3,alpha1,alpha2,alpha3\n"));
    // 1000 steps at stride 50 give 21 rows
    let csv_rows = out.lines().skip(1).take_while(|l| !l.starts_with('{')).count();
    assert_eq!(csv_rows, 21);
    let json_start = out.find('{').unwrap();
    let v: serde_json::Value = serde_json::from_str(&out[json_start..]).unwrap();
    assert_eq!(v["system"], "conformal_ode3");
    assert_eq!(v["rows"].as_array().unwrap().len(), 21);
}

#[test]
fn output_files_are_relative_to_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    std::fs::write(
        &manifest,
        r#"{"dimension": 2, "signature": [2, 0], "metric": {"components": [["1", "0"], ["1 + x1^2"]]},
            "job": {"kind": "tensors", "points": [[0.5, 0]], "output": "t.json"}}"#,
    )
    .unwrap();
    let other = tempfile::tempdir().unwrap();
    let r = parageo(&["tensors", manifest.to_str().unwrap()], other.path());
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(v[0]["g"][1][1].as_f64(), Some(1.25));
    assert!(v[0]["schouten"].is_null());
}

#[test]
fn malformed_manifests_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{\"dimension\": 3,"),
        (
            "unknown.json",
            r#"{"dimension": 3, "signature": [3, 0], "metric": {"builtin": "torus"}, "job": {"kind": "tensors", "points": [[0, 0, 0]]}}"#,
        ),
        (
            "parse.json",
            r#"{"dimension": 2, "signature": [2, 0], "metric": {"components": [["1 +", "0"], ["1"]]}, "job": {"kind": "tensors", "points": [[0, 0]]}}"#,
        ),
        (
            "signature.json",
            r#"{"dimension": 3, "signature": [3, 0], "metric": {"builtin": "minkowski"}, "job": {"kind": "tensors", "points": [[0, 0, 0]]}}"#,
        ),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let r = parageo(&["tensors", path.to_str().unwrap()], dir.path());
        assert_eq!(r.status.code(), Some(2), "{name}");
        assert!(!r.stderr.is_empty(), "{name}");
    }
    assert_eq!(parageo(&["tensors", "missing.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn builtins_are_listed() {
    let r = parageo(&["builtins"], Path::new("."));
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8(r.stdout).unwrap();
    for name in ["euclidean", "sphere_stereographic", "hyperbolic_halfspace", "minkowski"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn named_checks_run_alone() {
    let dir = tempfile::tempdir().unwrap();
    let r = parageo(&["check", "curvature", "rk4_order", SPHERE], dir.path());
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    let names: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["curvature", "rk4_order"]);
    assert!(v.as_array().unwrap().iter().all(|r| r["passed"] == true));

    let r = parageo(&["check", "no_such_check", SPHERE], dir.path());
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn step_override_changes_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let r = Command::new(BIN)
        .args(["integrate", SPHERE])
        .env("PARAGEO_STEP_OVERRIDE", "0.01")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let plain = parageo(&["integrate", SPHERE], dir.path());
    assert_ne!(r.stdout, plain.stdout);

    let bad = Command::new(BIN)
        .args(["integrate", SPHERE])
        .env("PARAGEO_STEP_OVERRIDE", "-1")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
