//! C ABI over the capround engine.
//!
//! Instances and solutions cross the boundary as opaque heap handles that the caller
//! releases with the matching `*_free` function. Every fallible call returns a [`CrStatus`];
//! on failure, [`cr_last_error`] describes the error of the calling thread. Strings returned
//! through out-parameters are owned by the caller and released with [`cr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use capround::cflp::solve_cflp;
use capround::ckflp::solve_ckflp;
use capround::ckm::{solve_ckm, AssignMode, Solution};
use capround::instance::{generate, load_instance, parse_instance, GenParams, Instance, Problem};
use capround::report::{write_json, write_metrics, MetricsRow};
use capround::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrStatus {
    Ok = 0,
    NullArgument = 1,
    Parse = 2,
    InvalidInstance = 3,
    Domain = 4,
    Infeasible = 5,
    Numeric = 6,
    /// A guaranteed bound did not hold; the solution is withheld.
    Falsified = 7,
    Io = 8,
    /// An internal panic was caught at the boundary.
    Panic = 9,
}

/// Problem selector for [`cr_solve`] and [`cr_instance_generate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrProblem {
    Ckm = 0,
    Cflp = 1,
    Ckflp = 2,
}

/// Opaque instance handle.
pub struct CrInstance(Instance);

/// Opaque solution handle.
pub struct CrSolution {
    sol: Solution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CrStatus {
    match e {
        Error::Parse { .. } => CrStatus::Parse,
        Error::Metric(_) | Error::InvalidInstance(_) => CrStatus::InvalidInstance,
        Error::Domain(_) | Error::SizeLimit(_) => CrStatus::Domain,
        Error::Infeasible(_) | Error::Unbounded => CrStatus::Infeasible,
        Error::Numeric(_) => CrStatus::Numeric,
        Error::Falsified { .. } => CrStatus::Falsified,
        Error::Io(_) => CrStatus::Io,
    }
}

/// Runs `f`, translating errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (CrStatus, String)>) -> CrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            CrStatus::Panic
        }
    }
}

fn lift(e: Error) -> (CrStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CrStatus, String) {
    (CrStatus::NullArgument, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CrStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (CrStatus::Domain, format!("{what} is not valid UTF-8")))
}

fn problem_of(p: c_int) -> Result<Problem, (CrStatus, String)> {
    match p {
        0 => Ok(Problem::Ckm),
        1 => Ok(Problem::Cflp),
        2 => Ok(Problem::Ckflp),
        _ => Err((CrStatus::Domain, format!("unknown problem code {p}"))),
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, (CrStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (CrStatus::Io, "output contains a NUL byte".to_string()))
}

/// Message of the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn cr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_load(path: *const c_char, out: *mut *mut CrInstance) -> CrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = read_str(path, "path")?;
        let inst = load_instance(path).map_err(lift)?;
        *out = Box::into_raw(Box::new(CrInstance(inst)));
        Ok(())
    })
}

/// Parses an instance from text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_parse(text: *const c_char, out: *mut *mut CrInstance) -> CrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(text, "text")?;
        let inst = parse_instance(text).map_err(lift)?;
        *out = Box::into_raw(Box::new(CrInstance(inst)));
        Ok(())
    })
}

/// Generates a random Euclidean instance with default cost range and side constraint.
/// `problem` is a [`CrProblem`] value.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_generate(
    problem: c_int,
    n_facilities: usize,
    n_clients: usize,
    capacity: u64,
    seed: u64,
    out: *mut *mut CrInstance,
) -> CrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let problem = problem_of(problem)?;
        let inst = generate(&GenParams::new(problem, n_facilities, n_clients, capacity, seed)).map_err(lift)?;
        *out = Box::into_raw(Box::new(CrInstance(inst)));
        Ok(())
    })
}

/// Number of facilities, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_n_facilities(inst: *const CrInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n_facilities())
}

/// Number of clients, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_n_clients(inst: *const CrInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n_clients())
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_free(inst: *mut CrInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Rounds `inst` for `problem` (a [`CrProblem`] value) with slack `eps`. `k` is only read for
/// k-facility location; `integral` non-zero also computes an integral client assignment.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_solve(
    inst: *const CrInstance,
    problem: c_int,
    eps: f64,
    k: usize,
    integral: c_int,
    out: *mut *mut CrSolution,
) -> CrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = &inst.as_ref().ok_or_else(|| null("inst"))?.0;
        let mode = if integral != 0 {
            AssignMode::Integral
        } else {
            AssignMode::Fractional
        };
        let sol = match problem_of(problem)? {
            Problem::Ckm => solve_ckm(inst, eps, mode),
            Problem::Cflp => solve_cflp(inst, eps, mode),
            Problem::Ckflp => solve_ckflp(inst, k, eps, mode),
        }
        .map_err(lift)?;
        *out = Box::into_raw(Box::new(CrSolution { sol }));
        Ok(())
    })
}

/// Objective value of the rounded solution, NaN for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_solution_cost(s: *const CrSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.sol.cost)
}

/// Optimal value of the LP relaxation the bounds refer to, NaN for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_solution_lp_opt(s: *const CrSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.sol.lp_opt)
}

/// Largest facility load divided by the capacity, NaN for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_solution_max_load_over_u(s: *const CrSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.sol.max_load_over_u)
}

/// Number of open facilities, 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_solution_open_count(s: *const CrSolution) -> usize {
    s.as_ref().map_or(0, |s| s.sol.open.len())
}

/// Copies up to `len` open facility ids into `buf`; `*written` receives the number copied.
///
/// # Safety
/// `s` must be a live handle, `buf` valid for `len` writes and `written` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_solution_open(s: *const CrSolution, buf: *mut usize, len: usize, written: *mut usize) -> CrStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("solution"))?;
        if written.is_null() || (buf.is_null() && len > 0) {
            return Err(null("buf"));
        }
        let n = s.sol.open.len().min(len);
        if n > 0 {
            ptr::copy_nonoverlapping(s.sol.open.as_ptr(), buf, n);
        }
        *written = n;
        Ok(())
    })
}

/// 1 when the budget (or cardinality), capacity and cost verdicts all hold, else 0.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_solution_ok(s: *const CrSolution) -> c_int {
    s.as_ref()
        .map_or(0, |s| c_int::from(s.sol.ok_budget && s.sol.ok_capacity && s.sol.ok_cost))
}

/// Metrics CSV (header plus one row) for the solution, labelled `name`.
///
/// # Safety
/// `s` must be a live handle, `name` a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_solution_metrics_csv(s: *const CrSolution, name: *const c_char, out: *mut *mut c_char) -> CrStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let name = read_str(name, "name")?;
        let mut buf = Vec::new();
        write_metrics(&mut buf, &[MetricsRow::new(name, &s.sol, None)], true).map_err(lift)?;
        *out = into_c_string(String::from_utf8_lossy(&buf).into_owned())?;
        Ok(())
    })
}

/// Run manifest as JSON.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_solution_manifest_json(s: *const CrSolution, out: *mut *mut c_char) -> CrStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut buf = Vec::new();
        write_json(&mut buf, &s.sol.manifest).map_err(lift)?;
        *out = into_c_string(String::from_utf8_lossy(&buf).into_owned())?;
        Ok(())
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_solution_free(s: *mut CrSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `p` must be null or a string obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}
