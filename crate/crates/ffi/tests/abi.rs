use std::ffi::{CStr, CString};
use std::ptr;

use isospec_ffi::*;

fn experiment(toml: &str) -> *mut IsospecExperiment {
    let text = CString::new(toml).unwrap();
    let mut handle = ptr::null_mut();
    let status = unsafe { isospec_experiment_from_toml(text.as_ptr(), &mut handle) };
    assert_eq!(status, IsospecStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    let p = isospec_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn lyapunov_of_default_experiment() {
    let h = experiment("[engine]\niterates = 20000\nphases = 4\n");
    let (mut value, mut err) = (0.0, 0.0);
    let status = unsafe { isospec_lyapunov(h, 0.0, 0.0, 0.0, &mut value, &mut err) };
    assert_eq!(status, IsospecStatus::Ok);
    assert!((value - 2f64.ln()).abs() < 1e-3, "{value}");
    assert!(isospec_last_error().is_null());
    unsafe { isospec_experiment_free(h) };
}

#[test]
fn origin_lies_off_the_ellipse() {
    let h = experiment("[engine]\niterates = 20000\nphases = 4\n");
    let (mut class, mut le) = (IsospecClass::Undecided, 0.0);
    let status = unsafe { isospec_uh_classify(h, 0.0, 0.0, 0.0, &mut class, &mut le) };
    assert_eq!(status, IsospecStatus::Ok);
    assert_eq!(class, IsospecClass::Uh);
    unsafe { isospec_experiment_free(h) };
}

#[test]
fn bad_config_reports_config_status() {
    let text = CString::new("[potential]\ncoupling = 1.0\nwidth = -1.0\nmodes = []\n").unwrap();
    let mut handle = ptr::null_mut();
    let status = unsafe { isospec_experiment_from_toml(text.as_ptr(), &mut handle) };
    assert_eq!(status, IsospecStatus::Config);
    assert!(handle.is_null());
    assert!(last_error().contains("configuration error"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut value = 0.0;
    let status = unsafe { isospec_lyapunov(ptr::null(), 0.0, 0.0, 0.0, &mut value, ptr::null_mut()) };
    assert_eq!(status, IsospecStatus::NullPointer);
    assert_eq!(last_error(), "experiment is null");
    let h = experiment("");
    let status = unsafe { isospec_lyapunov(h, 0.0, 0.0, 0.0, &mut value, ptr::null_mut()) };
    assert_eq!(status, IsospecStatus::NullPointer);
    unsafe { isospec_experiment_free(h) };
    unsafe { isospec_experiment_free(ptr::null_mut()) };
    unsafe { isospec_string_free(ptr::null_mut()) };
}

#[test]
fn strip_violation_maps_to_its_status() {
    let h = experiment("");
    let (mut value, mut err) = (0.0, 0.0);
    let status = unsafe { isospec_lyapunov(h, 0.0, 0.0, 5.0, &mut value, &mut err) };
    assert_ne!(status, IsospecStatus::Ok);
    assert!(!last_error().is_empty());
    unsafe { isospec_experiment_free(h) };
}

#[test]
fn kam_trace_and_digest_strings() {
    let h = experiment("[potential]\ncoupling = 0.001\nwidth = 1.0\ncone = 1.0\nmodes = [{ k = [1], re = 1.0 }]\n\n[profile]\neps_min = -0.5\neps_max = 0.5\n");
    let mut out = ptr::null_mut();
    let status = unsafe { isospec_kam_trace(h, 1.0, 0.5, &mut out) };
    assert_eq!(status, IsospecStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { isospec_string_free(out) };
    assert!(text.lines().last().unwrap().contains("\"hyperbolic\""), "{text}");

    let mut digest = ptr::null_mut();
    assert_eq!(unsafe { isospec_experiment_digest(h, &mut digest) }, IsospecStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(digest) }.to_bytes().len(), 64);
    unsafe { isospec_string_free(digest) };
    unsafe { isospec_experiment_free(h) };
}

#[test]
fn free_exponent_and_version() {
    assert!((isospec_free_laplacian_le(3.0, 0.0) - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-14);
    assert_eq!(isospec_free_laplacian_le(1.0, 0.0), 0.0);
    let v = unsafe { CStr::from_ptr(isospec_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
