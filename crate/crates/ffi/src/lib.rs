//! C interface to the s4gauss engine.
//!
//! An `S4Analysis` is an opaque handle built from configuration text or a
//! configuration file and released with `s4_analysis_free`. Every function
//! returns an `S4Status`; on failure a message is available from
//! `s4_last_error_message` on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use num_complex::Complex64;
use s4gauss::cli::config::{load_config, parse_config, RunConfig};
use s4gauss::cli::report::verify_analysis;
use s4gauss::energy::energy_density;
use s4gauss::pipeline::Analysis;
use s4gauss::Error;

/// Number of values per node returned by `s4_analysis_field_row`, in the
/// column order of the fields CSV.
pub const S4_FIELD_COLUMNS: usize = 18;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S4Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    ComputeError = 4,
    IoError = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Opaque analysis handle.
pub struct S4Analysis {
    config: RunConfig,
    analysis: Analysis,
    gauss: Vec<f64>,
    normal: Vec<f64>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct S4EnergySummary {
    pub energy: f64,
    pub willmore: f64,
    pub total_k: f64,
    pub area: f64,
    pub identity_residual: f64,
    pub bound_slack: f64,
    /// Area outside a truncated sphere chart; NaN when not applicable.
    pub tail: f64,
    pub genus: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct S4Verdict {
    pub tolerance: f64,
    pub max_m: f64,
    pub max_grad_h: f64,
    pub route_gap: f64,
    pub harmonic_by_m: c_int,
    pub harmonic_by_grad_h: c_int,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct S4FamilySummary {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub orthogonality: f64,
    pub sphere_deviation: f64,
    pub max_u_dev: f64,
    pub max_h1_dev: f64,
    pub max_xi1_dev: f64,
    pub max_k_dev: f64,
    /// NaN when the direction is not periodic.
    pub monodromy_x: f64,
    pub monodromy_y: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: S4Status, message: impl std::fmt::Display) -> S4Status {
    set_error(&message.to_string());
    status
}

fn compute_status(e: &Error) -> S4Status {
    match e {
        Error::Io(_) => S4Status::IoError,
        Error::BadLambda { .. } | Error::InvalidSpec(_) => S4Status::InvalidArgument,
        _ => S4Status::ComputeError,
    }
}

/// Runs `body` with the error slot cleared, turning panics into `Panic`.
fn guarded(body: impl FnOnce() -> S4Status) -> S4Status {
    set_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(S4Status::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, S4Status> {
    if ptr.is_null() {
        return Err(fail(S4Status::NullPointer, "null string argument"));
    }
    // SAFETY: the caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(S4Status::InvalidArgument, "string argument is not UTF-8"))
}

fn build(config: RunConfig, out: *mut *mut S4Analysis) -> S4Status {
    let grid = match config.grid() {
        Ok(g) => g,
        Err(e) => return fail(compute_status(&e), e),
    };
    match Analysis::on_grid(config.spec.clone(), grid) {
        Ok(analysis) => {
            let handle = S4Analysis {
                gauss: analysis.gauss_curvature(),
                normal: analysis.normal_curvature(),
                config,
                analysis,
            };
            // SAFETY: `out` was checked non-null by the caller of `build`.
            unsafe { *out = Box::into_raw(Box::new(handle)) };
            S4Status::Ok
        }
        Err(e) => fail(compute_status(&e), e),
    }
}

/// Builds an analysis from configuration text. Relative grid-file paths
/// resolve against the current directory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s4_analysis_from_config_text(text: *const c_char, out: *mut *mut S4Analysis) -> S4Status {
    guarded(|| {
        if out.is_null() {
            return fail(S4Status::NullPointer, "null output handle");
        }
        let text = match unsafe { read_str(text) } {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_config(text, Path::new(".")) {
            Ok(cfg) => build(cfg, out),
            Err(e) => fail(S4Status::ConfigError, e),
        }
    })
}

/// Builds an analysis from a configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s4_analysis_from_config_file(path: *const c_char, out: *mut *mut S4Analysis) -> S4Status {
    guarded(|| {
        if out.is_null() {
            return fail(S4Status::NullPointer, "null output handle");
        }
        let path = match unsafe { read_str(path) } {
            Ok(t) => t,
            Err(s) => return s,
        };
        match load_config(Path::new(path)) {
            Ok(cfg) => build(cfg, out),
            Err(e) => fail(S4Status::ConfigError, e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn s4_analysis_free(handle: *mut S4Analysis) {
    if !handle.is_null() {
        // SAFETY: the handle was produced by `Box::into_raw` in `build`.
        drop(unsafe { Box::from_raw(handle) });
    }
}

unsafe fn borrow<'a>(handle: *const S4Analysis) -> Result<&'a S4Analysis, S4Status> {
    // SAFETY: a non-null handle was produced by `build` and is still live.
    unsafe { handle.as_ref() }.ok_or_else(|| fail(S4Status::NullPointer, "null analysis handle"))
}

macro_rules! try_s4 {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

fn check_out<T>(p: *mut T) -> Result<(), S4Status> {
    if p.is_null() {
        Err(fail(S4Status::NullPointer, "null output pointer"))
    } else {
        Ok(())
    }
}

/// Grid dimensions; nodes are numbered `i + nx * j`.
///
/// # Safety
/// `handle` must be live; `nx`, `ny` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn s4_analysis_grid_size(handle: *const S4Analysis, nx: *mut usize, ny: *mut usize) -> S4Status {
    guarded(|| {
        let h = try_s4!(unsafe { borrow(handle) });
        try_s4!(check_out(nx));
        try_s4!(check_out(ny));
        unsafe {
            *nx = h.analysis.grid.nx;
            *ny = h.analysis.grid.ny;
        }
        S4Status::Ok
    })
}

/// Writes the `S4_FIELD_COLUMNS` values of node `node`:
/// `x, y, u, h1, h2, re xi1, im xi1, re xi2, im xi2, re sigma, im sigma,
/// K, Kperp, res_G, res_C1, res_C2, res_R, density`.
///
/// # Safety
/// `handle` must be live; `out` must hold `S4_FIELD_COLUMNS` doubles.
#[no_mangle]
pub unsafe extern "C" fn s4_analysis_field_row(handle: *const S4Analysis, node: usize, out: *mut f64) -> S4Status {
    guarded(|| {
        let h = try_s4!(unsafe { borrow(handle) });
        try_s4!(check_out(out));
        let a = &h.analysis;
        if node >= a.grid.len() {
            return fail(
                S4Status::OutOfRange,
                format!("node {node} outside a grid of {} nodes", a.grid.len()),
            );
        }
        let (x, y) = a.grid.point(node);
        let d = &a.fields.data[node];
        let r = &a.residuals;
        let row: [f64; S4_FIELD_COLUMNS] = [
            x,
            y,
            d.u,
            d.h1,
            d.h2,
            d.xi1.re,
            d.xi1.im,
            d.xi2.re,
            d.xi2.im,
            d.sigma.re,
            d.sigma.im,
            h.gauss[node],
            h.normal[node],
            r.res_g[node],
            r.res_c1[node],
            r.res_c2[node],
            r.res_r[node],
            energy_density(d),
        ];
        // SAFETY: the caller provides room for S4_FIELD_COLUMNS values.
        unsafe { std::ptr::copy_nonoverlapping(row.as_ptr(), out, S4_FIELD_COLUMNS) };
        S4Status::Ok
    })
}

/// Energy totals.
///
/// # Safety
/// `handle` must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s4_analysis_energy(handle: *const S4Analysis, out: *mut S4EnergySummary) -> S4Status {
    guarded(|| {
        let h = try_s4!(unsafe { borrow(handle) });
        try_s4!(check_out(out));
        let e = h.analysis.energy();
        let summary = S4EnergySummary {
            energy: e.energy,
            willmore: e.willmore,
            total_k: e.total_k,
            area: e.area,
            identity_residual: e.identity_residual,
            bound_slack: e.bound_slack,
            tail: e.tail.unwrap_or(f64::NAN),
            genus: e.genus,
        };
        unsafe { *out = summary };
        S4Status::Ok
    })
}

/// Harmonicity verdict; `tolerance <= 0` selects the grid-derived default.
///
/// # Safety
/// `handle` must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s4_analysis_verdict(
    handle: *const S4Analysis,
    tolerance: f64,
    out: *mut S4Verdict,
) -> S4Status {
    guarded(|| {
        let h = try_s4!(unsafe { borrow(handle) });
        try_s4!(check_out(out));
        if tolerance.is_nan() {
            return fail(S4Status::InvalidArgument, "tolerance is NaN");
        }
        let tol = (tolerance > 0.0).then_some(tolerance).or(h.config.tolerances.verdict);
        let v = h.analysis.verdict(tol);
        let verdict = S4Verdict {
            tolerance: v.tolerance,
            max_m: v.max_m,
            max_grad_h: v.max_grad_h,
            route_gap: v.route_gap,
            harmonic_by_m: c_int::from(v.harmonic_by_m),
            harmonic_by_grad_h: c_int::from(v.harmonic_by_grad_h),
        };
        unsafe { *out = verdict };
        S4Status::Ok
    })
}

/// Integrates the family member at `lambda = re + i im` (on the unit
/// circle) with the configured path settings.
///
/// # Safety
/// `handle` must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s4_analysis_family(
    handle: *const S4Analysis,
    re: f64,
    im: f64,
    out: *mut S4FamilySummary,
) -> S4Status {
    guarded(|| {
        let h = try_s4!(unsafe { borrow(handle) });
        try_s4!(check_out(out));
        let samples = match h.analysis.family(&[Complex64::new(re, im)], &h.config.path) {
            Ok(s) => s,
            Err(e) => return fail(compute_status(&e), e),
        };
        let d = &samples[0].diagnostics;
        let summary = S4FamilySummary {
            lambda_re: re,
            lambda_im: im,
            orthogonality: d.orthogonality,
            sphere_deviation: d.sphere_deviation,
            max_u_dev: d.max_u_dev,
            max_h1_dev: d.max_h_dev[0],
            max_xi1_dev: d.max_xi_dev[0],
            max_k_dev: d.max_k_dev,
            monodromy_x: d.monodromy_x.unwrap_or(f64::NAN),
            monodromy_y: d.monodromy_y.unwrap_or(f64::NAN),
        };
        unsafe { *out = summary };
        S4Status::Ok
    })
}

/// Runs the residual suite: `*passed` is 1 when every check passes and
/// `*failed` counts the failing checks.
///
/// # Safety
/// `handle` must be live; `passed`, `failed` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn s4_analysis_verify(
    handle: *const S4Analysis,
    passed: *mut c_int,
    failed: *mut usize,
) -> S4Status {
    guarded(|| {
        let h = try_s4!(unsafe { borrow(handle) });
        try_s4!(check_out(passed));
        try_s4!(check_out(failed));
        match verify_analysis(&h.analysis, &h.config.tolerances) {
            Ok(r) => {
                unsafe {
                    *passed = c_int::from(r.passed());
                    *failed = r.failures().count();
                }
                S4Status::Ok
            }
            Err(e) => fail(compute_status(&e), e),
        }
    })
}

/// Message of the last failed call on this thread (empty after success).
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn s4_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn s4_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
