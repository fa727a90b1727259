use std::ffi::{c_char, CStr, CString};
use std::ptr;

use pseudopower_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(pp_last_error()) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { pp_string_free(p) };
    s
}

fn model(json: &str) -> *mut PpModel {
    let mut out = ptr::null_mut();
    let status = unsafe { pp_model_from_json(cstr(json).as_ptr(), &mut out) };
    assert_eq!(status, PpStatus::Ok, "{}", last_error());
    out
}

#[test]
fn closed_form_series_matches_exact_evolution() {
    let m = model(r#"{"family": "block-transfer", "n": 20, "g": "3/2"}"#);
    let (mut evolved, mut closed) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(pp_model_evolve(m, cstr("exact").as_ptr(), PpVectors::Special, 0, 44, &mut evolved), PpStatus::Ok);
        assert_eq!(pp_closed_form(20, cstr("3/2").as_ptr(), 44, &mut closed), PpStatus::Ok);
        let mut len = 0;
        assert_eq!(pp_series_len(evolved, &mut len), PpStatus::Ok);
        assert_eq!(len, 45);
        for k in 0..len {
            let (mut a_re, mut a_im) = (ptr::null_mut(), ptr::null_mut());
            let (mut b_re, mut b_im) = (ptr::null_mut(), ptr::null_mut());
            assert_eq!(pp_series_sample_exact(evolved, k, &mut a_re, &mut a_im), PpStatus::Ok);
            assert_eq!(pp_series_sample_exact(closed, k, &mut b_re, &mut b_im), PpStatus::Ok);
            assert_eq!(take_string(a_re), take_string(b_re), "t = {k}");
            assert_eq!(take_string(a_im), take_string(b_im));
        }
        let (mut t, mut re, mut im) = (0, 0.0, 0.0);
        assert_eq!(pp_series_sample(closed, 22, &mut t, &mut re, &mut im), PpStatus::Ok);
        assert_eq!((t, re, im), (22, 1.0, 0.0));
        let mut csv = ptr::null_mut();
        assert_eq!(pp_series_to_csv(closed, 10, &mut csv), PpStatus::Ok);
        assert!(take_string(csv).contains("re_exact"));
        pp_series_free(evolved);
        pp_series_free(closed);
        pp_model_free(m);
    }
}

#[test]
fn matrix_handles_and_smin() {
    let m = model(r#"{"family": "block-transfer", "n": 20, "g": "2"}"#);
    let mut a = ptr::null_mut();
    unsafe {
        assert_eq!(pp_matrix_build(m, cstr("big:128").as_ptr(), &mut a), PpStatus::Ok);
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(pp_matrix_shape(a, &mut rows, &mut cols), PpStatus::Ok);
        assert_eq!((rows, cols), (20, 20));
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(pp_matrix_entry(a, 1, 0, &mut re, &mut im), PpStatus::Ok);
        assert_eq!((re, im), (2.0, 0.0));
        assert_eq!(pp_matrix_entry(a, 0, 1, &mut re, &mut im), PpStatus::Ok);
        assert_eq!(re, 0.5);
        assert_eq!(pp_matrix_entry(a, 20, 0, &mut re, &mut im), PpStatus::DimensionMismatch);
        assert!(last_error().contains("outside"));
        let mut level = 0.0;
        assert_eq!(pp_matrix_smin_level(a, 2.0, 0.0, &mut level), PpStatus::Ok);
        assert!((10f64.powf(level) - 0.1989).abs() < 1e-3, "{level}");
        let mut json = ptr::null_mut();
        assert_eq!(pp_matrix_to_json(a, &mut json), PpStatus::Ok);
        assert!(take_string(json).contains("big:128"));
        pp_matrix_free(a);
        pp_model_free(m);
    }
}

#[test]
fn random_evolution_and_fit() {
    let m = model(r#"{"family": "block-transfer", "n": 400, "g": "2"}"#);
    let mut a = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(pp_matrix_build(m, cstr("machine").as_ptr(), &mut a), PpStatus::Ok);
        assert_eq!(pp_matrix_evolve(a, PpVectors::Random, 7, 200, &mut s), PpStatus::Ok);
        let (mut slope, mut intercept) = (0.0, 0.0);
        assert_eq!(pp_series_fit(s, 20, 180, false, &mut slope, &mut intercept), PpStatus::Ok);
        assert!((slope - 2f64.ln()).abs() < 0.05 * 2f64.ln(), "{slope}");
        assert_eq!(pp_series_fit(s, 45, 5, false, &mut slope, &mut intercept), PpStatus::InvalidArgument);
        pp_series_free(s);
        pp_matrix_free(a);
        pp_model_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(pp_model_from_json(cstr("{not json").as_ptr(), &mut m), PpStatus::Parse);
        assert_eq!(pp_model_from_json(ptr::null(), &mut m), PpStatus::NullPointer);
        assert!(last_error().contains("null"));
        let odd = model(r#"{"family": "block-transfer", "n": 5, "g": "2"}"#);
        let mut a = ptr::null_mut();
        assert_eq!(pp_matrix_build(odd, cstr("exact").as_ptr(), &mut a), PpStatus::InvalidArgument);
        assert_eq!(pp_matrix_build(odd, cstr("big:7").as_ptr(), &mut a), PpStatus::InvalidArgument);
        pp_model_free(odd);
        let eh = model(r#"{"family": "ehrenfest", "n": 4}"#);
        let mut s = ptr::null_mut();
        assert_eq!(
            pp_model_evolve(eh, cstr("exact").as_ptr(), PpVectors::Special, 0, 4, &mut s),
            PpStatus::UnsupportedBackend
        );
        pp_model_free(eh);
        assert_eq!(pp_matrix_load(cstr("/nonexistent/m.json").as_ptr(), &mut a), PpStatus::Io);
        assert_eq!(pp_series_len(ptr::null(), &mut 0), PpStatus::NullPointer);
        pp_string_free(ptr::null_mut());
        pp_matrix_free(ptr::null_mut());
    }
    assert!(!unsafe { CStr::from_ptr(pp_version()) }.to_bytes().is_empty());
}

#[test]
fn loads_a_saved_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let m = model(r#"{"family": "tilted-pauli", "g": "2"}"#);
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(pp_matrix_build(m, cstr("exact").as_ptr(), &mut a), PpStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(pp_matrix_to_json(a, &mut json), PpStatus::Ok);
        std::fs::write(&path, take_string(json)).unwrap();
        assert_eq!(pp_matrix_load(cstr(path.to_str().unwrap()).as_ptr(), &mut b), PpStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(pp_matrix_entry(b, 0, 1, &mut re, &mut im), PpStatus::Ok);
        assert_eq!(re, 2.0);
        pp_matrix_free(a);
        pp_matrix_free(b);
        pp_model_free(m);
    }
}
