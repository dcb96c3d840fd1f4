//! C ABI over the orbitheight library.
//!
//! Every fallible function returns an [`OhStatus`]; on failure a message is
//! available from [`oh_last_error`] on the same thread. Objects are opaque
//! handles released with their `_free` function, and strings returned
//! through `char **` out-parameters are released with [`oh_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use orbitheight::arith::{height_rational, parse_rational, Rational};
use orbitheight::density::EventuallyPeriodicSet;
use orbitheight::jobs::{parse_job, run, JobError, RunOptions};
use orbitheight::orbit::{iterate_orbit, OrbitTrace};
use orbitheight::poly::{parse_expression, vars, RationalMap};
use orbitheight::schanuel::count_points;

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    RuntimeError = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// A rational self-map of affine space.
pub struct OhMap(RationalMap);

/// A computed orbit trace with observable values and heights.
pub struct OhTrace(OrbitTrace);

/// An eventually periodic subset of the natural numbers.
pub struct OhSet(EventuallyPeriodicSet);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

type FfiResult<T> = Result<T, (OhStatus, String)>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> OhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            OhStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OhStatus::Panic
        }
    }
}

fn null() -> (OhStatus, String) {
    (OhStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(p: *const c_char) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (OhStatus::InvalidUtf8, "argument is not valid UTF-8".into()))
}

unsafe fn str_array<'a>(p: *const *const c_char, len: usize) -> FfiResult<Vec<&'a str>> {
    if p.is_null() && len > 0 {
        return Err(null());
    }
    (0..len).map(|i| str_arg(*p.add(i))).collect()
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(null)
}

unsafe fn handle<'a, T>(p: *const T) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(null)
}

fn parse_err(e: impl std::fmt::Display) -> (OhStatus, String) {
    (OhStatus::ParseError, e.to_string())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message for the last failed call on this thread; empty after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn oh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn oh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn oh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Logarithmic height of a rational given as text, e.g. `"-22/7"`.
///
/// # Safety
/// `q` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_height_rational(q: *const c_char, out: *mut f64) -> OhStatus {
    guard(|| {
        let value = parse_rational(str_arg(q)?).map_err(parse_err)?;
        *out_ptr(out)? = height_rational(&value);
        Ok(())
    })
}

/// Parses a map from variable names and one expression per variable.
///
/// # Safety
/// The arrays must hold `nvars` and `ncomponents` NUL-terminated strings;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_map_new(
    variables: *const *const c_char,
    nvars: usize,
    components: *const *const c_char,
    ncomponents: usize,
    out: *mut *mut OhMap,
) -> OhStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let names = str_array(variables, nvars)?;
        let comps = str_array(components, ncomponents)?;
        if names.is_empty() {
            return Err((OhStatus::InvalidArgument, "no variables".into()));
        }
        let map = RationalMap::parse(&vars(&names), &comps).map_err(parse_err)?;
        *out = Box::into_raw(Box::new(OhMap(map)));
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a handle from [`oh_map_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oh_map_free(map: *mut OhMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Canonical text form of a map, e.g. `"(2*x*z, y + 1, z + 1)"`.
///
/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_map_to_string(map: *const OhMap, out: *mut *mut c_char) -> OhStatus {
    guard(|| {
        let m = handle(map)?;
        *out_ptr(out)? = into_c_string(m.0.to_string());
        Ok(())
    })
}

/// Iterates `map` from `start` for rows `0..=horizon`, evaluating the
/// observable expression on each point. An early stop is not an error;
/// query it with [`oh_trace_stop_reason`].
///
/// # Safety
/// `map` must be a live handle, `observable` a NUL-terminated string,
/// `start` an array of `nstart` NUL-terminated rationals, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn oh_orbit_iterate(
    map: *const OhMap,
    observable: *const c_char,
    start: *const *const c_char,
    nstart: usize,
    horizon: usize,
    out: *mut *mut OhTrace,
) -> OhStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let m = &handle(map)?.0;
        let f = parse_expression(str_arg(observable)?, m.vars()).map_err(parse_err)?;
        let point = str_array(start, nstart)?
            .into_iter()
            .map(parse_rational)
            .collect::<Result<Vec<Rational>, _>>()
            .map_err(parse_err)?;
        let trace = iterate_orbit(m, &f, &point, horizon)
            .map_err(|e| (OhStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(OhTrace(trace)));
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oh_trace_free(trace: *mut OhTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of computed rows; 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn oh_trace_len(trace: *const OhTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.rows.len())
}

unsafe fn row<'a>(trace: *const OhTrace, i: usize) -> FfiResult<&'a orbitheight::orbit::OrbitRow> {
    let t = handle(trace)?;
    t.0.rows
        .get(i)
        .ok_or_else(|| (OhStatus::OutOfRange, format!("row {i} of {}", t.0.rows.len())))
}

/// Height of the observable value at row `i`.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_trace_height(trace: *const OhTrace, i: usize, out: *mut f64) -> OhStatus {
    guard(|| {
        *out_ptr(out)? = row(trace, i)?.height;
        Ok(())
    })
}

/// Observable value at row `i` as an exact rational or `"inf"`.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_trace_value(
    trace: *const OhTrace,
    i: usize,
    out: *mut *mut c_char,
) -> OhStatus {
    guard(|| {
        *out_ptr(out)? = into_c_string(row(trace, i)?.value.to_string());
        Ok(())
    })
}

/// `"completed"`, `"map-indeterminacy@n"` or `"observable-indeterminacy@n"`.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_trace_stop_reason(
    trace: *const OhTrace,
    out: *mut *mut c_char,
) -> OhStatus {
    guard(|| {
        *out_ptr(out)? = into_c_string(handle(trace)?.0.stop_reason.to_string());
        Ok(())
    })
}

/// Trace as CSV with columns `n,point,value,height,ratio`.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_trace_to_csv(trace: *const OhTrace, out: *mut *mut c_char) -> OhStatus {
    guard(|| {
        *out_ptr(out)? = into_c_string(handle(trace)?.0.to_csv());
        Ok(())
    })
}

/// Number of points of projective `n`-space over Q with multiplicative
/// height at most `bound`; fails if the box exceeds `budget` vectors.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_schanuel_count(
    n: u32,
    bound: u64,
    budget: u64,
    out: *mut u64,
) -> OhStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let r = count_points(n, bound, budget as u128).map_err(|e| match e {
            orbitheight::schanuel::SchanuelError::InvalidParameter(m) => (OhStatus::InvalidArgument, m),
            e => (OhStatus::RuntimeError, e.to_string()),
        })?;
        *out = r.count;
        Ok(())
    })
}

/// Parses a set written as `mod m: {r,...} +{added} -{removed}`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_set_parse(text: *const c_char, out: *mut *mut OhSet) -> OhStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let set: EventuallyPeriodicSet = str_arg(text)?.parse().map_err(parse_err)?;
        *out = Box::into_raw(Box::new(OhSet(set)));
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oh_set_free(set: *mut OhSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Natural density as an exact fraction string.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_set_density(set: *const OhSet, out: *mut *mut c_char) -> OhStatus {
    guard(|| {
        *out_ptr(out)? = into_c_string(handle(set)?.0.density().to_string());
        Ok(())
    })
}

/// Membership test.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_set_contains(set: *const OhSet, n: u64, out: *mut bool) -> OhStatus {
    guard(|| {
        *out_ptr(out)? = handle(set)?.0.contains(n);
        Ok(())
    })
}

/// The set of shifts `i` with `d(S ∩ (S + i)) > 0`, as a new handle.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_set_shift_set(set: *const OhSet, out: *mut *mut OhSet) -> OhStatus {
    guard(|| {
        let sigma = handle(set)?.0.shift_set();
        *out_ptr(out)? = Box::into_raw(Box::new(OhSet(sigma)));
        Ok(())
    })
}

/// Canonical text form of a set.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oh_set_to_string(set: *const OhSet, out: *mut *mut c_char) -> OhStatus {
    guard(|| {
        *out_ptr(out)? = into_c_string(handle(set)?.0.to_string());
        Ok(())
    })
}

/// Runs a job given as JSON text and returns its CSV and JSON reports.
/// Invalid jobs give `ParseError`, failed runs `RuntimeError`. A run that
/// stops early returns `RuntimeError` and still fills both reports.
///
/// # Safety
/// `job_json` must be a NUL-terminated string; `csv_out` and `json_out`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn oh_job_run(
    job_json: *const c_char,
    budget: u64,
    csv_out: *mut *mut c_char,
    json_out: *mut *mut c_char,
) -> OhStatus {
    guard(|| {
        let csv_out = out_ptr(csv_out)?;
        let json_out = out_ptr(json_out)?;
        let map_err = |e: JobError| match e {
            JobError::Validation(m) => (OhStatus::ParseError, m),
            e => (OhStatus::RuntimeError, e.to_string()),
        };
        let job = parse_job(str_arg(job_json)?).map_err(map_err)?;
        let opts = RunOptions { budget: budget as u128, threads: None };
        let reports = run(&job, &opts).map_err(map_err)?;
        *csv_out = into_c_string(reports.csv);
        *json_out = into_c_string(reports.json);
        match reports.warning {
            Some(w) => Err((OhStatus::RuntimeError, w)),
            None => Ok(()),
        }
    })
}
