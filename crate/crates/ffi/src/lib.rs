//! C interface to `cpa_lyap`. Objects are opaque heap handles released with
//! their `*_free` function; every fallible call returns a [`CpaStatus`] and
//! leaves a message retrievable with [`cpa_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cpa_lyap::cert::verify_certificate;
use cpa_lyap::cli::{builtin_system, parse_config};
use cpa_lyap::expr::{Interval, SystemModel};
use cpa_lyap::mesh::{build_grid_mesh, Triangulation};
use cpa_lyap::synth::{adapt, run_method, SynthesisConfig, SynthesisReport};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Mesh = 4,
    Synthesis = 5,
    Panic = 6,
}

/// Dynamics and domain.
pub struct CpaSystem(SystemModel);

/// Simplicial mesh.
pub struct CpaMesh(Triangulation);

/// Outcome of a synthesis run.
pub struct CpaReport {
    report: SynthesisReport,
    valid: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CpaStatus, String);

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CpaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CpaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CpaStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CpaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CpaStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s)
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cpa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cpa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a system from `dim` expression strings over the box `[lo, hi]`.
///
/// # Safety
/// `dynamics` must hold `dim` C strings; `lo` and `hi` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn cpa_system_new(
    name: *const c_char,
    dynamics: *const *const c_char,
    dim: usize,
    lo: *const f64,
    hi: *const f64,
    system: *mut *mut CpaSystem,
) -> CpaStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        if dynamics.is_null() || lo.is_null() || hi.is_null() {
            return Err(null("dynamics or bounds"));
        }
        let slot = out(system, "system")?;
        let exprs = std::slice::from_raw_parts(dynamics, dim)
            .iter()
            .map(|&p| str_arg(p, "dynamics entry"))
            .collect::<Result<Vec<_>, _>>()?;
        let (lo, hi) = (
            std::slice::from_raw_parts(lo, dim),
            std::slice::from_raw_parts(hi, dim),
        );
        if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
            return Err(Failure(
                CpaStatus::InvalidArgument,
                "empty domain interval".into(),
            ));
        }
        let domain = lo
            .iter()
            .zip(hi)
            .map(|(&a, &b)| Interval::new(a, b))
            .collect();
        let m = SystemModel::new(name, &exprs, domain)
            .map_err(|e| Failure(CpaStatus::Parse, e.to_string()))?;
        *slot = Box::into_raw(Box::new(CpaSystem(m)));
        Ok(())
    })
}

/// One of the built-in benchmark systems `"A"` to `"D"`.
///
/// # Safety
/// `name` must be a C string and `system` writable.
#[no_mangle]
pub unsafe extern "C" fn cpa_system_builtin(
    name: *const c_char,
    system: *mut *mut CpaSystem,
) -> CpaStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let slot = out(system, "system")?;
        let m = builtin_system(name).ok_or_else(|| {
            Failure(
                CpaStatus::InvalidArgument,
                format!("no built-in system {name:?}"),
            )
        })?;
        *slot = Box::into_raw(Box::new(CpaSystem(m)));
        Ok(())
    })
}

/// # Safety
/// `system` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cpa_system_free(system: *mut CpaSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// # Safety
/// `system` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cpa_system_dim(system: *const CpaSystem) -> usize {
    system.as_ref().map_or(0, |s| s.0.dim())
}

/// Uniform Freudenthal grid over the system domain with one spacing per axis.
///
/// # Safety
/// `spacing` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn cpa_mesh_grid(
    system: *const CpaSystem,
    spacing: *const f64,
    mesh: *mut *mut CpaMesh,
) -> CpaStatus {
    guard(|| {
        let s = obj(system, "system")?;
        if spacing.is_null() {
            return Err(null("spacing"));
        }
        let slot = out(mesh, "mesh")?;
        let h = std::slice::from_raw_parts(spacing, s.0.dim());
        let t = build_grid_mesh(s.0.domain(), h)
            .map_err(|e| Failure(CpaStatus::Mesh, e.to_string()))?;
        *slot = Box::into_raw(Box::new(CpaMesh(t)));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cpa_mesh_free(mesh: *mut CpaMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cpa_mesh_num_vertices(mesh: *const CpaMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.num_vertices())
}

/// # Safety
/// `mesh` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cpa_mesh_num_simplices(mesh: *const CpaMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.num_simplices())
}

/// Copies the coordinates of vertex `index` into `coords` (dimension entries).
///
/// # Safety
/// `coords` must have room for the mesh dimension.
#[no_mangle]
pub unsafe extern "C" fn cpa_mesh_vertex(
    mesh: *const CpaMesh,
    index: usize,
    coords: *mut f64,
) -> CpaStatus {
    guard(|| {
        let t = &obj(mesh, "mesh")?.0;
        if coords.is_null() {
            return Err(null("coords"));
        }
        if index >= t.num_vertices() {
            return Err(Failure(
                CpaStatus::InvalidArgument,
                format!("vertex {index} out of range"),
            ));
        }
        ptr::copy_nonoverlapping(t.vertex(index).as_ptr(), coords, t.dim());
        Ok(())
    })
}

/// Copies the vertex indices of simplex `index` into `vertices`
/// (dimension + 1 entries).
///
/// # Safety
/// `vertices` must have room for dimension + 1 values.
#[no_mangle]
pub unsafe extern "C" fn cpa_mesh_simplex(
    mesh: *const CpaMesh,
    index: usize,
    vertices: *mut usize,
) -> CpaStatus {
    guard(|| {
        let t = &obj(mesh, "mesh")?.0;
        if vertices.is_null() {
            return Err(null("vertices"));
        }
        if index >= t.num_simplices() {
            return Err(Failure(
                CpaStatus::InvalidArgument,
                format!("simplex {index} out of range"),
            ));
        }
        ptr::copy_nonoverlapping(t.simplex(index).as_ptr(), vertices, t.dim() + 1);
        Ok(())
    })
}

/// Longest-edge bisection of simplex `index`, in place.
///
/// # Safety
/// `mesh` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cpa_mesh_refine(mesh: *mut CpaMesh, index: usize) -> CpaStatus {
    guard(|| {
        let t = &mut out(mesh, "mesh")?.0;
        t.refine_leb_in_place(index)
            .map_err(|e| Failure(CpaStatus::Mesh, e.to_string()))
    })
}

/// Mesh as JSON; release with [`cpa_string_free`].
///
/// # Safety
/// `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cpa_mesh_to_json(
    mesh: *const CpaMesh,
    json: *mut *mut c_char,
) -> CpaStatus {
    guard(|| {
        let t = &obj(mesh, "mesh")?.0;
        *out(json, "json")? = into_c_string(t.to_json());
        Ok(())
    })
}

/// Adaptive refinement starting from `mesh`; the mesh handle is not modified.
///
/// # Safety
/// All handles must be live and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn cpa_adapt(
    system: *const CpaSystem,
    mesh: *const CpaMesh,
    alpha: f64,
    max_iterations: usize,
    report: *mut *mut CpaReport,
) -> CpaStatus {
    guard(|| {
        let s = &obj(system, "system")?.0;
        let t = &obj(mesh, "mesh")?.0;
        let slot = out(report, "report")?;
        let cfg = SynthesisConfig {
            alpha,
            max_iterations,
            ..Default::default()
        };
        if max_iterations == 0 || !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Failure(
                CpaStatus::InvalidArgument,
                format!("need alpha > 0 and max_iterations >= 1, got {alpha} and {max_iterations}"),
            ));
        }
        let r =
            adapt(s, t.clone(), &cfg).map_err(|e| Failure(CpaStatus::Synthesis, e.to_string()))?;
        *slot = Box::into_raw(Box::new(wrap(s, r)));
        Ok(())
    })
}

fn wrap(m: &SystemModel, report: SynthesisReport) -> CpaReport {
    let valid = report.verdict.is_viable()
        && report
            .candidate
            .as_ref()
            .is_some_and(|c| verify_certificate(m, &report.mesh, c).valid);
    CpaReport { report, valid }
}

/// Runs a JSON configuration (same schema as the command-line tool).
///
/// # Safety
/// `config_json` must be a C string and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn cpa_run_config(
    config_json: *const c_char,
    report: *mut *mut CpaReport,
) -> CpaStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        let slot = out(report, "report")?;
        let spec = parse_config(text).map_err(|e| Failure(CpaStatus::Parse, e.to_string()))?;
        let r = run_method(&spec.model, &spec.config)
            .map_err(|e| Failure(CpaStatus::Synthesis, e.to_string()))?;
        *slot = Box::into_raw(Box::new(wrap(&spec.model, r)));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cpa_report_free(report: *mut CpaReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// True when synthesis succeeded and the certificate rechecks.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cpa_report_viable(report: *const CpaReport) -> bool {
    report.as_ref().is_some_and(|r| r.valid)
}

/// Number of slack programs solved.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cpa_report_iterations(report: *const CpaReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.iterations())
}

/// Simplices added to the initial mesh.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cpa_report_delta_simplices(report: *const CpaReport) -> isize {
    report.as_ref().map_or(0, |r| r.report.delta_simplices())
}

/// Copy of the final mesh; release with [`cpa_mesh_free`].
///
/// # Safety
/// `report` must be a live handle and `mesh` writable.
#[no_mangle]
pub unsafe extern "C" fn cpa_report_mesh(
    report: *const CpaReport,
    mesh: *mut *mut CpaMesh,
) -> CpaStatus {
    guard(|| {
        let r = obj(report, "report")?;
        *out(mesh, "mesh")? = Box::into_raw(Box::new(CpaMesh(r.report.mesh.clone())));
        Ok(())
    })
}

/// Final candidate as JSON; release with [`cpa_string_free`].
///
/// # Safety
/// `report` must be a live handle and `json` writable.
#[no_mangle]
pub unsafe extern "C" fn cpa_report_candidate_json(
    report: *const CpaReport,
    json: *mut *mut c_char,
) -> CpaStatus {
    guard(|| {
        let r = obj(report, "report")?;
        let slot = out(json, "json")?;
        let c = r
            .report
            .candidate
            .as_ref()
            .ok_or_else(|| Failure(CpaStatus::Synthesis, "no candidate was produced".into()))?;
        *slot = into_c_string(c.to_json());
        Ok(())
    })
}
