use std::ffi::{CStr, CString};
use std::ptr;

use aggper_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(aggper_last_error()) }.to_string_lossy().into_owned()
}

fn two_by_two_lc() -> *mut AggperProblem {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { aggper_gen_lc(2, 2, 0, &mut p) }, AggperStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn generate_compile_solve() {
    unsafe {
        let p = two_by_two_lc();
        assert_eq!(aggper_problem_members(p), 4);
        let mut values = Vec::new();
        for f in [AggperFormulation::P0, AggperFormulation::Per, AggperFormulation::Agg] {
            let mut m = ptr::null_mut();
            assert_eq!(aggper_compile(p, f, false, &mut m), AggperStatus::Ok);
            assert!(aggper_model_num_integers(m) > 0);
            let mut r = AggperMipResult::default();
            assert_eq!(aggper_solve_mip(m, 1e-6, 0.0, &mut r), AggperStatus::Ok);
            assert_eq!(r.status, AggperSolveStatus::Optimal as i32);
            assert!(r.bound <= r.value + 1e-9 && r.root_bound <= r.bound + 1e-9);
            let (mut st, mut lb) = (AggperSolveStatus::Limit, f64::NAN);
            assert_eq!(aggper_solve_relaxation(m, &mut st, &mut lb), AggperStatus::Ok);
            assert_eq!(st, AggperSolveStatus::Optimal);
            assert!((lb - r.root_bound).abs() <= 1e-6 * lb.abs().max(1.0));
            values.push(r.value);
            aggper_model_free(m);
        }
        assert!(values.iter().all(|v| (v - values[0]).abs() <= 1e-6 * values[0].abs().max(1.0)));
        aggper_problem_free(p);
    }
}

#[test]
fn json_and_text_round_trip() {
    unsafe {
        let p = two_by_two_lc();
        let mut json = ptr::null_mut();
        assert_eq!(aggper_problem_to_json(p, &mut json), AggperStatus::Ok);
        let mut q = ptr::null_mut();
        assert_eq!(aggper_problem_from_json(json, &mut q), AggperStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(aggper_problem_to_json(q, &mut again), AggperStatus::Ok);
        assert_eq!(CStr::from_ptr(json), CStr::from_ptr(again));

        let mut m = ptr::null_mut();
        assert_eq!(aggper_compile(q, AggperFormulation::Agg, true, &mut m), AggperStatus::Ok);
        assert_eq!(aggper_model_num_integers(m), 0);
        let mut text = ptr::null_mut();
        assert_eq!(aggper_model_emit(m, AggperFormat::ConicText, &mut text), AggperStatus::Ok);
        assert!(CStr::from_ptr(text).to_str().unwrap().contains("OBJ"));

        for s in [json, again, text] {
            aggper_string_free(s);
        }
        aggper_model_free(m);
        aggper_problem_free(p);
        aggper_problem_free(q);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(aggper_gen_lc(0, 2, 0, &mut p), AggperStatus::InvalidArgument);
        assert!(p.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(aggper_gen_sqp(2, 2, 2, 0, ptr::null_mut()), AggperStatus::NullPointer);
        assert!(last_error().contains("out"));

        let bad = CString::new("{ not json").unwrap();
        assert_eq!(aggper_problem_from_json(bad.as_ptr(), &mut p), AggperStatus::Parse);
        assert_eq!(aggper_problem_from_json(ptr::null(), &mut p), AggperStatus::NullPointer);

        let mut m = ptr::null_mut();
        assert_eq!(aggper_compile(ptr::null(), AggperFormulation::Agg, false, &mut m), AggperStatus::NullPointer);
        let mut r = AggperMipResult::default();
        assert_eq!(aggper_solve_mip(ptr::null(), 1e-6, 0.0, &mut r), AggperStatus::NullPointer);

        let q = two_by_two_lc();
        assert_eq!(aggper_compile(q, AggperFormulation::P0, false, &mut m), AggperStatus::Ok);
        assert_eq!(aggper_solve_mip(m, 0.0, 0.0, &mut r), AggperStatus::InvalidArgument);
        aggper_model_free(m);
        aggper_problem_free(q);

        assert_eq!(aggper_model_num_vars(ptr::null()), 0);
        aggper_problem_free(ptr::null_mut());
        aggper_model_free(ptr::null_mut());
        aggper_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/aggper.h");
    for name in [
        "aggper_last_error",
        "aggper_gen_lc",
        "aggper_gen_sqp",
        "aggper_problem_from_json",
        "aggper_problem_to_json",
        "aggper_problem_members",
        "aggper_problem_free",
        "aggper_compile",
        "aggper_model_num_vars",
        "aggper_model_num_integers",
        "aggper_model_emit",
        "aggper_model_free",
        "aggper_string_free",
        "aggper_solve_relaxation",
        "aggper_solve_mip",
        "typedef struct AggperProblem AggperProblem",
        "typedef struct AggperModel AggperModel",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
