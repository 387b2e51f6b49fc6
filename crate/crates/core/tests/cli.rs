use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(command: &str, config: &str, out: &Path) -> (i32, Value) {
    let cfg = out.with_extension("json");
    fs::write(&cfg, config).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_helfrich"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    (status.code().unwrap(), manifest)
}

fn report(out: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(name)).unwrap()).unwrap()
}

fn schema() -> jsonschema::Validator {
    let s: Value = serde_json::from_str(helfrich::cli::MANIFEST_SCHEMA).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

const SPHERE_ENERGY: &str =
    r#"{"mesh": {"primitive": {"kind": "icosphere", "radius": 1, "level": 3}}, "params": {"H0": 0, "lambda": 0, "diagnostic": true}}"#;

#[test]
fn energy_of_unit_sphere() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("energy");
    let (code, manifest) = run("energy", SPHERE_ENERGY, &out);
    assert_eq!(code, 0);
    assert!(schema().is_valid(&manifest));
    let total = report(&out, "energy.json")["total"].as_f64().unwrap();
    assert!((total - 16.0 * PI).abs() < 0.02 * 16.0 * PI, "{total}");
}

#[test]
fn diagnose_flat_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("diag");
    let (code, manifest) = run("diagnose", r#"{"mesh": {"primitive": {"kind": "disk", "radius": 1, "level": 3}}}"#, &out);
    assert_eq!(code, 0);
    assert!(schema().is_valid(&manifest));
    let r = report(&out, "diagnose.json");
    assert_eq!(r["bad_points"].as_array().unwrap().len(), 0);
    assert!((r["gauss_bonnet_total"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-9);
}

#[test]
fn minimize_without_boundary_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("min");
    let cfg = r#"{"mesh": {"primitive": {"kind": "disk", "radius": 1, "level": 2}}, "params": {"H0": 0, "lambda": 0.1}}"#;
    let (code, manifest) = run("minimize", cfg, &out);
    assert_eq!(code, 1);
    assert!(schema().is_valid(&manifest));
    assert_eq!(manifest["status"], "error");
    assert_eq!(manifest["reason"], "unbound boundary loop");
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let cfg = r#"{"mesh": {"primitive": {"kind": "disk", "radius": 1, "level": 2}}, "extra": true}"#;
    let (code, manifest) = run("diagnose", cfg, &out);
    assert_eq!(code, 1);
    assert_eq!(manifest["error_kind"], "parse");
    assert!(manifest["reason"].as_str().unwrap().contains("extra"));
    let (code, _) = run("diagnose", "[1, 2]", &out);
    assert_eq!(code, 1);
}

#[test]
fn numerical_failure_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("num");
    let cfg = r#"{"field": {"kind": "polynomial", "coeffs": [0, 0, 0, 1]}, "rho": 1e-300, "n": 4, "samples": 16}"#;
    let (code, manifest) = run("biharmonic", cfg, &out);
    assert_eq!(code, 2, "{manifest}");
    assert_eq!(manifest["error_kind"], "numerical");
    assert!(schema().is_valid(&manifest));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "mesh": {"primitive": {"kind": "icosphere", "radius": 1, "level": 2}},
        "params": {"H0": 1, "lambda": 1},
        "perturb": 0.1,
        "options": {"max_iters": 30},
        "seed": 7
    }"#;
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let (ca, ma) = run("minimize", cfg, &a);
    let (cb, mb) = run("minimize", cfg, &b);
    assert_eq!((ca, cb), (0, 0));
    assert_eq!(ma, mb);
    assert_eq!(ma["seed"], 7);
    for f in ma["files"].as_array().unwrap() {
        let p = f["path"].as_str().unwrap();
        assert_eq!(fs::read(a.join(p)).unwrap(), fs::read(b.join(p)).unwrap(), "{p}");
    }
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());
}

#[test]
fn every_command_produces_a_valid_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let disk = r#"{"primitive": {"kind": "disk", "radius": 1, "level": 2}}"#;
    let cases = [
        ("primitive", r#"{"mesh": {"kind": "torus", "major_radius": 2, "minor_radius": 0.5, "level": 1}, "format": "off"}"#.to_string()),
        ("energy", SPHERE_ENERGY.to_string()),
        (
            "minimize",
            format!(
                r#"{{"mesh": {disk}, "params": {{"H0": 0, "lambda": 0.1}},
                "boundary": {{"curve": "circle", "radius": 1.0, "center": [0, 0, 0], "normal_rule": {{"kind": "in-plane"}}}},
                "options": {{"max_iters": 10}}}}"#
            ),
        ),
        (
            "varifold",
            format!(
                r#"{{"mesh": {disk}, "reference": {{"along": [0, 0, 1]}}, "compare": {disk},
                "density": [{{"center": [0, 0, 0], "sigma": 0.5}}]}}"#
            ),
        ),
        ("diagnose", format!(r#"{{"mesh": {disk}, "epsilon0": 0.5, "rho": 0.3}}"#)),
        ("slab", r#"{"params": {"H0": 1, "lambda": 0.01}, "options": {"max_iters": 5}}"#.to_string()),
        ("lsc-graph", r#"{"params": {"H0": 0, "lambda": 1}, "bases": [{"kind": "flat"}], "ms": [8], "n": 32}"#.to_string()),
        ("biharmonic", r#"{"field": {"kind": "random", "seed": 3, "modes": 4}, "rho": 0.5, "n": 8, "scaling": [0.5, 0.25]}"#.to_string()),
        ("axisym", r#"{"problem": {"start": {"radius": 0, "angle_deg": 0}, "end": {"radius": 1, "height": 0, "angle_deg": -30}}, "params": {"H0": 0, "lambda": 0.1}, "n": 64, "revolve": 32}"#.to_string()),
    ];
    let validator = schema();
    for (cmd, cfg) in cases {
        let out = tmp.path().join(cmd);
        let (code, manifest) = run(cmd, &cfg, &out);
        assert_eq!(code, 0, "{cmd}: {manifest}");
        assert!(validator.is_valid(&manifest), "{cmd}");
        let files = manifest["files"].as_array().unwrap();
        assert!(!files.is_empty(), "{cmd}");
        for f in files {
            assert!(out.join(f["path"].as_str().unwrap()).exists());
        }
    }
}
