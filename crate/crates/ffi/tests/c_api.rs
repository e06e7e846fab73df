//! Exercises the C ABI exactly as a foreign caller would: raw pointers,
//! status codes, handle lifecycle.

use std::ffi::CString;
use std::ptr;

use gphc_ffi::*;

fn hoel() -> *mut GphcSampleHandle {
    let mut h: *mut GphcSampleHandle = ptr::null_mut();
    let st = unsafe { gphc_sample_builtin_hoel(&mut h) };
    assert!(st == GphcStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn builtin_sample_stats_and_fit() {
    let h = hoel();
    let (mut j, mut d1, mut d2, mut w) = (0u32, 0u32, 0u32, 0f64);
    assert!(unsafe { gphc_sample_stats(h, &mut j, &mut d1, &mut d2, &mut w) } == GphcStatus::Ok);
    assert_eq!((j, d1, d2), (25, 7, 18));
    assert_eq!(w, 28962.0);

    let (mut t1, mut t2) = (0f64, 0f64);
    let (mut e1, mut e2) = (0i32, 0i32);
    assert!(unsafe { gphc_fit(h, &mut t1, &mut e1, &mut t2, &mut e2) } == GphcStatus::Ok);
    assert_eq!((e1, e2), (1, 1));
    assert_eq!(t1, 28962.0 / 7.0);
    assert_eq!(t2, 1609.0);
    unsafe { gphc_sample_free(h) };
}

#[test]
fn csv_parsing_and_validation_errors() {
    let removals: Vec<u32> = {
        let mut r = vec![2u32; 25];
        r[24] = 4;
        r
    };
    let text = CString::new("z,cause\n40,2\n42,2\n62,2\n163,2\n179,2\n206,2\n222,2\n228,2\n252,2\n259,2\n318,1\n385,2\n407,2\n420,2\n462,2\n507,2\n517,2\n524,2\n525,1\n528,1\n536,1\n605,1\n612,1\n620,2\n621,1\n").unwrap();
    let mut h: *mut GphcSampleHandle = ptr::null_mut();
    let st = unsafe {
        gphc_sample_from_csv(
            text.as_ptr(),
            77,
            25,
            20,
            700.0,
            removals.as_ptr(),
            25,
            &mut h,
        )
    };
    assert!(st == GphcStatus::Ok);
    let (mut j, mut d1, mut d2, mut w) = (0u32, 0u32, 0u32, 0f64);
    unsafe { gphc_sample_stats(h, &mut j, &mut d1, &mut d2, &mut w) };
    assert_eq!(w, 28962.0);
    unsafe { gphc_sample_free(h) };

    // Invalid design: removal sum violates m + sum(R) = n.
    let bad = unsafe {
        gphc_sample_from_csv(
            text.as_ptr(),
            77,
            25,
            20,
            700.0,
            removals.as_ptr(),
            24,
            &mut h,
        )
    };
    assert!(bad == GphcStatus::Validation);
    let mut buf = [0i8; 256];
    let len = unsafe { gphc_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(len > 0);

    // Null pointers are rejected, not dereferenced.
    assert!(
        unsafe { gphc_sample_from_csv(ptr::null(), 1, 1, 1, 1.0, ptr::null(), 0, &mut h) }
            == GphcStatus::NullArgument
    );
}

#[test]
fn exact_and_bootstrap_intervals_through_abi() {
    let h = hoel();
    let (mut lo, mut hi, mut exists) = (0f64, 0f64, 0i32);
    let st = unsafe { gphc_exact_ci(h, 2, 0.05, &mut lo, &mut hi, &mut exists) };
    assert!(st == GphcStatus::Ok);
    assert_eq!(exists, 1);
    assert!((lo / 1018.497 - 1.0).abs() < 0.005, "lower {lo}");
    assert!((hi / 2790.006 - 1.0).abs() < 0.005, "upper {hi}");

    let st = unsafe { gphc_bootstrap_ci(h, 1, 0.05, 200, 7, &mut lo, &mut hi) };
    assert!(st == GphcStatus::Ok);
    assert!(lo > 0.0 && hi > lo);

    // Invalid target code.
    assert!(
        unsafe { gphc_exact_ci(h, 3, 0.05, &mut lo, &mut hi, &mut exists) }
            == GphcStatus::Validation
    );
    unsafe { gphc_sample_free(h) };
}

#[test]
fn bayes_estimates_and_hpd_through_abi() {
    let h = hoel();
    let (mut t1, mut t2) = (0f64, 0f64);
    // Matching prior: estimates coincide with the MLEs.
    let st = unsafe { gphc_bayes_estimates(h, 0.0, 2.0, 1.0, 1.0, &mut t1, &mut t2) };
    assert!(st == GphcStatus::Ok);
    assert_eq!(t1, 28962.0 / 7.0);
    assert_eq!(t2, 1609.0);

    let (mut lo, mut hi) = (0f64, 0f64);
    let st =
        unsafe { gphc_hpd_interval(h, 0.0, 2.0, 1.0, 1.0, 1, 0.05, 100_000, 3, &mut lo, &mut hi) };
    assert!(st == GphcStatus::Ok);
    assert!((lo / 1715.194 - 1.0).abs() < 0.05, "hpd lower {lo}");
    assert!((hi / 7480.241 - 1.0).abs() < 0.05, "hpd upper {hi}");
    unsafe { gphc_sample_free(h) };
}

#[test]
fn simulate_and_mixture_evaluation() {
    let mut removals = [0u32; 18];
    removals[17] = 2;
    let mut h: *mut GphcSampleHandle = ptr::null_mut();
    let st = unsafe { gphc_simulate(20, 18, 5, 1.2, removals.as_ptr(), 18, 1.0, 1.3, 42, &mut h) };
    assert!(st == GphcStatus::Ok);
    let (mut j, mut d1, mut d2, mut w) = (0u32, 0u32, 0u32, 0f64);
    unsafe { gphc_sample_stats(h, &mut j, &mut d1, &mut d2, &mut w) };
    assert!((5..=18).contains(&j));
    assert_eq!(j, d1 + d2);
    unsafe { gphc_sample_free(h) };

    let mut mix: *mut GphcMixtureHandle = ptr::null_mut();
    let st =
        unsafe { gphc_mixture_new(20, 18, 5, 1.2, removals.as_ptr(), 18, 1.0, 1.3, 1, &mut mix) };
    assert!(st == GphcStatus::Ok);
    let (mut pdf, mut cdf) = (0f64, 0f64);
    assert!(unsafe { gphc_mixture_eval(mix, 1.0, &mut pdf, &mut cdf) } == GphcStatus::Ok);
    assert!(pdf > 0.0);
    assert!(cdf > 0.0 && cdf < 1.0);
    let mut prev = 0.0;
    for i in 1..=30 {
        unsafe { gphc_mixture_eval(mix, 0.2 * i as f64, &mut pdf, &mut cdf) };
        assert!(cdf >= prev - 1e-12);
        prev = cdf;
    }
    let mut p0 = -1.0;
    assert!(unsafe { gphc_mixture_prob_zero(mix, &mut p0) } == GphcStatus::Ok);
    assert!(p0 > 0.0 && p0 < 1e-4);
    unsafe { gphc_mixture_free(mix) };
}
