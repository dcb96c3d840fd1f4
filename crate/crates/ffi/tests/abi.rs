use std::ffi::{c_char, CStr, CString};
use std::ptr;

use orbitheight_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { oh_string_free(s) };
    text
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(oh_last_error()) }.to_str().unwrap().to_string()
}

fn cstrs(items: &[&str]) -> (Vec<CString>, Vec<*const c_char>) {
    let owned: Vec<CString> = items.iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs = owned.iter().map(|s| s.as_ptr()).collect();
    (owned, ptrs)
}

#[test]
fn height_of_rational() {
    let mut h = 0.0;
    let q = CString::new("2/3").unwrap();
    assert_eq!(unsafe { oh_height_rational(q.as_ptr(), &mut h) }, OhStatus::Ok);
    assert!((h - 3f64.ln()).abs() < 1e-12);
    let bad = CString::new("2/0").unwrap();
    assert_eq!(unsafe { oh_height_rational(bad.as_ptr(), &mut h) }, OhStatus::ParseError);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { oh_height_rational(ptr::null(), &mut h) }, OhStatus::NullPointer);
    assert_eq!(unsafe { oh_height_rational(q.as_ptr(), ptr::null_mut()) }, OhStatus::NullPointer);
}

#[test]
fn map_and_orbit() {
    let (_v, vp) = cstrs(&["x"]);
    let (_c, cp) = cstrs(&["3-x"]);
    let mut map = ptr::null_mut();
    assert_eq!(unsafe { oh_map_new(vp.as_ptr(), 1, cp.as_ptr(), 1, &mut map) }, OhStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { oh_map_to_string(map, &mut s) }, OhStatus::Ok);
    assert_eq!(take(s), "(-1*x + 3)");

    let obs = CString::new("x").unwrap();
    let (_s, sp) = cstrs(&["1"]);
    let mut trace = ptr::null_mut();
    assert_eq!(unsafe { oh_orbit_iterate(map, obs.as_ptr(), sp.as_ptr(), 1, 5, &mut trace) }, OhStatus::Ok);
    assert_eq!(unsafe { oh_trace_len(trace) }, 6);
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { oh_trace_value(trace, 1, &mut v) }, OhStatus::Ok);
    assert_eq!(take(v), "2");
    let mut h = 0.0;
    assert_eq!(unsafe { oh_trace_height(trace, 1, &mut h) }, OhStatus::Ok);
    assert!((h - 2f64.ln()).abs() < 1e-12);
    assert_eq!(unsafe { oh_trace_height(trace, 6, &mut h) }, OhStatus::OutOfRange);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { oh_trace_stop_reason(trace, &mut r) }, OhStatus::Ok);
    assert_eq!(take(r), "completed");
    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { oh_trace_to_csv(trace, &mut csv) }, OhStatus::Ok);
    assert!(take(csv).starts_with("n,point,value,height,ratio\n"));
    unsafe {
        oh_trace_free(trace);
        oh_map_free(map);
        oh_map_free(ptr::null_mut());
    }
}

#[test]
fn map_errors() {
    let (_v, vp) = cstrs(&["x"]);
    let (_c, cp) = cstrs(&["y+1"]);
    let mut map = ptr::null_mut();
    assert_eq!(unsafe { oh_map_new(vp.as_ptr(), 1, cp.as_ptr(), 1, &mut map) }, OhStatus::ParseError);
    assert!(map.is_null());
    assert!(last_error().contains('y'));
    assert_eq!(unsafe { oh_map_new(vp.as_ptr(), 0, cp.as_ptr(), 1, &mut map) }, OhStatus::InvalidArgument);
}

#[test]
fn counting() {
    let mut n = 0;
    assert_eq!(unsafe { oh_schanuel_count(1, 2, 1_000_000, &mut n) }, OhStatus::Ok);
    assert_eq!(n, 8);
    assert_eq!(unsafe { oh_schanuel_count(2, 1, 1_000_000, &mut n) }, OhStatus::Ok);
    assert_eq!(n, 13);
    assert_eq!(unsafe { oh_schanuel_count(2, 100, 1000, &mut n) }, OhStatus::RuntimeError);
    assert_eq!(unsafe { oh_schanuel_count(0, 10, 1000, &mut n) }, OhStatus::InvalidArgument);
}

#[test]
fn sets() {
    let text = CString::new("mod 6: {1,4} +{0}").unwrap();
    let mut set = ptr::null_mut();
    assert_eq!(unsafe { oh_set_parse(text.as_ptr(), &mut set) }, OhStatus::Ok);
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { oh_set_density(set, &mut d) }, OhStatus::Ok);
    assert_eq!(take(d), "1/3");
    let mut b = false;
    assert_eq!(unsafe { oh_set_contains(set, 0, &mut b) }, OhStatus::Ok);
    assert!(b);
    let mut sigma = ptr::null_mut();
    assert_eq!(unsafe { oh_set_shift_set(set, &mut sigma) }, OhStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { oh_set_to_string(sigma, &mut s) }, OhStatus::Ok);
    assert_eq!(take(s), "mod 3: {0}");
    unsafe {
        oh_set_free(sigma);
        oh_set_free(set);
    }
    let bad = CString::new("mod 0: {}").unwrap();
    assert_eq!(unsafe { oh_set_parse(bad.as_ptr(), &mut set) }, OhStatus::ParseError);
}

#[test]
fn jobs() {
    let job = CString::new(orbitheight::catalog::catalog_job("catalan").unwrap()).unwrap();
    let (mut csv, mut json) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { oh_job_run(job.as_ptr(), 1_000_000, &mut csv, &mut json) }, OhStatus::Ok);
    assert!(take(csv).starts_with("n,term,height,ratio\n"));
    assert!(take(json).contains("HeightGrowth"));
    let bad = CString::new("{\"kind\":\"orbit\"}").unwrap();
    let (mut csv, mut json) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { oh_job_run(bad.as_ptr(), 0, &mut csv, &mut json) }, OhStatus::ParseError);
    assert!(csv.is_null() && json.is_null());
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(oh_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = include_str!("../include/orbitheight.h");
    let src = include_str!("../src/lib.rs");
    for line in src.lines().filter(|l| l.contains("extern \"C\" fn ")) {
        let name = line.split("fn ").nth(1).unwrap().split('(').next().unwrap();
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}
