//! C interface to `helfrich`. Meshes live behind opaque handles; every
//! fallible call returns a [`HelfrichStatus`] and leaves a message for
//! [`helfrich_last_error`] on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use helfrich::boundary::{bind, BoundarySpec, ClampSet};
use helfrich::cli::{self, Command};
use helfrich::energy::{energy_gradient, EnergyParams};
use helfrich::mesh::{generate_primitive, load, Point, PrimitiveSpec, TriMesh};
use helfrich::optimizer::{minimize, OptOptions};
use helfrich::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HelfrichStatus {
    Ok = 0,
    InvalidInput = 1,
    Numerical = 2,
    Parse = 3,
    Io = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Opaque triangle mesh.
pub struct HelfrichMesh {
    mesh: TriMesh,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HelfrichStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HelfrichStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            HelfrichStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            match e {
                Error::InvalidInput(_) => HelfrichStatus::InvalidInput,
                Error::Numerical(_) => HelfrichStatus::Numerical,
                Error::Parse(_) => HelfrichStatus::Parse,
                Error::Io(_) => HelfrichStatus::Io,
            }
        }
        Err(_) => {
            set_error("internal panic");
            HelfrichStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Lib(Error::invalid(format!("{what} is not valid UTF-8"))))
}

unsafe fn mesh_arg<'a>(m: *const HelfrichMesh) -> Result<&'a TriMesh, Fail> {
    m.as_ref().map(|h| &h.mesh).ok_or(Fail::Null("mesh"))
}

unsafe fn emit(out: *mut *mut HelfrichMesh, mesh: TriMesh) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(HelfrichMesh { mesh }));
    Ok(())
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(Fail::Null("out"));
    }
    if len != need {
        return Err(Fail::Lib(Error::invalid(format!("output buffer holds {len} values, {need} required"))));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn params(h0: f64, lambda: f64) -> Result<EnergyParams, Fail> {
    Ok(EnergyParams::diagnostic(h0, lambda)?)
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn helfrich_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn helfrich_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a mesh from `3 * n_vertices` coordinates and `3 * n_faces`
/// zero-based vertex indices.
///
/// # Safety
/// `vertices` and `faces` must point to arrays of the stated lengths and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn helfrich_mesh_new(
    vertices: *const f64,
    n_vertices: usize,
    faces: *const u32,
    n_faces: usize,
    out: *mut *mut HelfrichMesh,
) -> HelfrichStatus {
    guard(|| {
        if vertices.is_null() || faces.is_null() {
            return Err(Fail::Null("vertices or faces"));
        }
        let v = std::slice::from_raw_parts(vertices, 3 * n_vertices);
        let f = std::slice::from_raw_parts(faces, 3 * n_faces);
        let points = v.chunks_exact(3).map(|c| Point::new(c[0], c[1], c[2])).collect();
        let tris = f.chunks_exact(3).map(|c| [c[0] as usize, c[1] as usize, c[2] as usize]).collect();
        emit(out, TriMesh::new(points, tris)?)
    })
}

/// Generate a primitive from its JSON description, for example
/// `{"kind": "icosphere", "radius": 1, "level": 3}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn helfrich_mesh_primitive(spec_json: *const c_char, out: *mut *mut HelfrichMesh) -> HelfrichStatus {
    guard(|| {
        let spec: PrimitiveSpec = serde_json::from_str(str_arg(spec_json, "spec_json")?).map_err(Error::from)?;
        emit(out, generate_primitive(&spec)?)
    })
}

/// Read an OBJ, OFF or JSON mesh file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn helfrich_mesh_load(path: *const c_char, out: *mut *mut HelfrichMesh) -> HelfrichStatus {
    guard(|| emit(out, load(Path::new(str_arg(path, "path")?))?))
}

/// # Safety
/// `mesh` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn helfrich_mesh_free(mesh: *mut HelfrichMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn helfrich_mesh_vertex_count(mesh: *const HelfrichMesh) -> usize {
    mesh.as_ref().map_or(0, |h| h.mesh.n_vertices())
}

/// # Safety
/// `mesh` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn helfrich_mesh_face_count(mesh: *const HelfrichMesh) -> usize {
    mesh.as_ref().map_or(0, |h| h.mesh.n_faces())
}

/// Copy vertex coordinates into `out`, which must hold `3 * vertex_count`.
///
/// # Safety
/// `mesh` must be a live handle and `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn helfrich_mesh_vertices(mesh: *const HelfrichMesh, out: *mut f64, len: usize) -> HelfrichStatus {
    guard(|| {
        let m = mesh_arg(mesh)?;
        let dst = out_slice(out, len, 3 * m.n_vertices())?;
        for (d, p) in dst.chunks_exact_mut(3).zip(m.vertices()) {
            d.copy_from_slice(&[p.x, p.y, p.z]);
        }
        Ok(())
    })
}

/// Copy face indices into `out`, which must hold `3 * face_count`.
///
/// # Safety
/// `mesh` must be a live handle and `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn helfrich_mesh_faces(mesh: *const HelfrichMesh, out: *mut u32, len: usize) -> HelfrichStatus {
    guard(|| {
        let m = mesh_arg(mesh)?;
        let dst = out_slice(out, len, 3 * m.n_faces())?;
        for (d, f) in dst.chunks_exact_mut(3).zip(m.faces()) {
            for k in 0..3 {
                d[k] = u32::try_from(f[k]).map_err(|_| Error::invalid("vertex index exceeds 32 bits"))?;
            }
        }
        Ok(())
    })
}

/// Helfrich energy; `lambda = 0` is allowed. Either output may be null.
///
/// # Safety
/// `mesh` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn helfrich_energy(
    mesh: *const HelfrichMesh,
    h0: f64,
    lambda: f64,
    out_bending: *mut f64,
    out_total: *mut f64,
) -> HelfrichStatus {
    guard(|| {
        let e = helfrich::energy::helfrich_energy(mesh_arg(mesh)?, &params(h0, lambda)?)?;
        if let Some(b) = out_bending.as_mut() {
            *b = e.bending;
        }
        if let Some(t) = out_total.as_mut() {
            *t = e.total;
        }
        Ok(())
    })
}

/// Energy gradient with respect to vertex positions, `3 * vertex_count`
/// values.
///
/// # Safety
/// `mesh` must be a live handle and `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn helfrich_energy_gradient(
    mesh: *const HelfrichMesh,
    h0: f64,
    lambda: f64,
    out: *mut f64,
    len: usize,
) -> HelfrichStatus {
    guard(|| {
        let m = mesh_arg(mesh)?;
        let g = energy_gradient(m, &params(h0, lambda)?)?;
        let dst = out_slice(out, len, 3 * m.n_vertices())?;
        for (d, v) in dst.chunks_exact_mut(3).zip(&g) {
            d.copy_from_slice(&[v.x, v.y, v.z]);
        }
        Ok(())
    })
}

/// Minimize the energy from `mesh`. `boundary_json` describes the clamped
/// boundary (required for open meshes, may be null for closed ones);
/// `options_json` may be null for defaults. The minimized mesh is a new
/// handle.
///
/// # Safety
/// `mesh` must be a live handle, string arguments NUL-terminated or null,
/// `out` writable and `out_energy` writable or null.
#[no_mangle]
pub unsafe extern "C" fn helfrich_minimize(
    mesh: *const HelfrichMesh,
    h0: f64,
    lambda: f64,
    boundary_json: *const c_char,
    options_json: *const c_char,
    out: *mut *mut HelfrichMesh,
    out_energy: *mut f64,
) -> HelfrichStatus {
    guard(|| {
        let m = mesh_arg(mesh)?;
        let p = EnergyParams::new(h0, lambda)?;
        let clamp = if boundary_json.is_null() {
            ClampSet::empty(m)?
        } else {
            let spec: BoundarySpec = serde_json::from_str(str_arg(boundary_json, "boundary_json")?).map_err(Error::from)?;
            bind(m, &spec.sample()?)?
        };
        let opts: OptOptions = if options_json.is_null() {
            OptOptions::default()
        } else {
            serde_json::from_str(str_arg(options_json, "options_json")?).map_err(Error::from)?
        };
        let r = minimize(m, &p, &clamp, &opts)?;
        if let Some(e) = out_energy.as_mut() {
            *e = r.energy.total;
        }
        emit(out, r.mesh)
    })
}

/// Run a command-line experiment (`"energy"`, `"minimize"`, ...) on a JSON
/// configuration, writing artifacts and `manifest.json` into `out_dir`.
/// `exit_code` receives the command's exit status (0, 1 or 2); the return
/// value reports failures to run at all.
///
/// # Safety
/// String arguments must be NUL-terminated; `out_dir` may be null to use
/// the configuration's `out`. `exit_code` must be writable.
#[no_mangle]
pub unsafe extern "C" fn helfrich_run(
    command: *const c_char,
    config_json: *const c_char,
    out_dir: *const c_char,
    exit_code: *mut i32,
) -> HelfrichStatus {
    guard(|| {
        let cmd: Command = str_arg(command, "command")?.parse()?;
        let text = str_arg(config_json, "config_json")?;
        let dir = if out_dir.is_null() { None } else { Some(Path::new(str_arg(out_dir, "out_dir")?)) };
        if exit_code.is_null() {
            return Err(Fail::Null("exit_code"));
        }
        let outcome = cli::run(cmd, text, dir, None)?;
        *exit_code = outcome.exit_code();
        if let Some(r) = &outcome.manifest.reason {
            set_error(r);
        }
        Ok(())
    })
}

