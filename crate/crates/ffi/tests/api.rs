use std::ffi::{CStr, CString};
use std::ptr;

use helfrich_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(helfrich_last_error()) }.to_string_lossy().into_owned()
}

fn primitive(spec: &str) -> *mut HelfrichMesh {
    let s = CString::new(spec).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { helfrich_mesh_primitive(s.as_ptr(), &mut m) }, HelfrichStatus::Ok, "{}", last_error());
    m
}

#[test]
fn arrays_round_trip_through_handle() {
    let v = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let f = [0u32, 1, 2];
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(helfrich_mesh_new(v.as_ptr(), 3, f.as_ptr(), 1, &mut m), HelfrichStatus::Ok);
        assert_eq!(helfrich_mesh_vertex_count(m), 3);
        assert_eq!(helfrich_mesh_face_count(m), 1);
        let mut back = [0.0; 9];
        assert_eq!(helfrich_mesh_vertices(m, back.as_mut_ptr(), 9), HelfrichStatus::Ok);
        assert_eq!(back, v);
        let mut fb = [9u32; 3];
        assert_eq!(helfrich_mesh_faces(m, fb.as_mut_ptr(), 3), HelfrichStatus::Ok);
        assert_eq!(fb, f);
        helfrich_mesh_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut m = ptr::null_mut();
    let bad = CString::new(r#"{"kind": "icosphere", "radius": -1, "level": 2}"#).unwrap();
    let garbled = CString::new("{").unwrap();
    unsafe {
        assert_eq!(helfrich_mesh_primitive(bad.as_ptr(), &mut m), HelfrichStatus::InvalidInput);
        assert!(!last_error().is_empty());
        assert_eq!(helfrich_mesh_primitive(garbled.as_ptr(), &mut m), HelfrichStatus::Parse);
        assert_eq!(helfrich_mesh_primitive(ptr::null(), &mut m), HelfrichStatus::NullPointer);
        assert_eq!(helfrich_energy(ptr::null(), 0.0, 1.0, ptr::null_mut(), ptr::null_mut()), HelfrichStatus::NullPointer);
        let f = [0u32, 1, 7];
        let v = [0.0; 9];
        assert_eq!(helfrich_mesh_new(v.as_ptr(), 3, f.as_ptr(), 1, &mut m), HelfrichStatus::InvalidInput);
        helfrich_mesh_free(ptr::null_mut());
    }
    assert!(m.is_null());
}

#[test]
fn energy_and_gradient_of_sphere() {
    let m = primitive(r#"{"kind": "icosphere", "radius": 1, "level": 3}"#);
    unsafe {
        let (mut b, mut t) = (0.0, 0.0);
        assert_eq!(helfrich_energy(m, 0.0, 0.0, &mut b, &mut t), HelfrichStatus::Ok);
        assert_eq!(b, t);
        assert!((t - 16.0 * std::f64::consts::PI).abs() < 0.02 * 16.0 * std::f64::consts::PI);
        let n = helfrich_mesh_vertex_count(m);
        let mut g = vec![0.0; 3 * n];
        assert_eq!(helfrich_energy_gradient(m, 0.0, 0.0, g.as_mut_ptr(), g.len()), HelfrichStatus::Ok);
        assert!(g.iter().all(|x| x.is_finite()));
        helfrich_mesh_free(m);
    }
}

#[test]
fn minimize_open_mesh_requires_boundary() {
    let m = primitive(r#"{"kind": "disk", "radius": 1, "level": 2}"#);
    let mut out = ptr::null_mut();
    let mut e = 0.0;
    let boundary = CString::new(r#"{"curve": "circle", "radius": 1.0, "center": [0, 0, 0], "normal_rule": {"kind": "in-plane"}}"#).unwrap();
    let opts = CString::new(r#"{"max_iters": 20}"#).unwrap();
    unsafe {
        assert_eq!(helfrich_minimize(m, 0.0, 0.1, ptr::null(), ptr::null(), &mut out, &mut e), HelfrichStatus::InvalidInput);
        assert_eq!(last_error(), "invalid input: unbound boundary loop");
        assert_eq!(helfrich_minimize(m, 0.0, 0.1, boundary.as_ptr(), opts.as_ptr(), &mut out, &mut e), HelfrichStatus::Ok);
        assert!((e - 0.1 * std::f64::consts::PI).abs() < 0.03 * 0.1 * std::f64::consts::PI, "{e}");
        helfrich_mesh_free(out);
        helfrich_mesh_free(m);
    }
}

#[test]
fn run_writes_manifest_and_reports_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let cmd = CString::new("diagnose").unwrap();
    let cfg = CString::new(r#"{"mesh": {"primitive": {"kind": "disk", "radius": 1, "level": 2}}}"#).unwrap();
    let mut code = -1;
    unsafe {
        assert_eq!(helfrich_run(cmd.as_ptr(), cfg.as_ptr(), out.as_ptr(), &mut code), HelfrichStatus::Ok);
    }
    assert_eq!(code, 0);
    assert!(dir.path().join("manifest.json").exists());
    let bad = CString::new("minimize").unwrap();
    let cfg = CString::new(r#"{"mesh": {"primitive": {"kind": "disk", "radius": 1, "level": 2}}, "params": {"H0": 0, "lambda": 0.1}}"#).unwrap();
    unsafe {
        assert_eq!(helfrich_run(bad.as_ptr(), cfg.as_ptr(), out.as_ptr(), &mut code), HelfrichStatus::Ok);
    }
    assert_eq!(code, 1);
    assert_eq!(last_error(), "unbound boundary loop");
    let unknown = CString::new("plot").unwrap();
    unsafe {
        assert_eq!(helfrich_run(unknown.as_ptr(), cfg.as_ptr(), out.as_ptr(), &mut code), HelfrichStatus::InvalidInput);
    }
}
