//! C ABI over the gphc library: opaque handles, integer status codes, and a
//! thread-local last-error message. Every function returns `GphcStatus`;
//! outputs go through pointers. Handles must be released with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use std::slice;

use gphc::bayes::{bayes_estimates, hpd_interval, posterior, BetaGammaParams, GFunction};
use gphc::error::Error;
use gphc::estimation::fit_mle;
use gphc::exact::{SchemeDistribution, SignedGammaMixture, Target};
use gphc::intervals::{bootstrap_ci, exact_ci, OtherThetaPolicy};
use gphc::io::{parse_csv_observations, sample_from_pairs};
use gphc::rngs::replication_rng;
use gphc::sample::{generate_sample, GphcSample};
use gphc::scheme::CensoringScheme;

/// Status codes returned by every gphc function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum GphcStatus {
    Ok = 0,
    /// Numerical failure (root finding, cancellation, non-existent moments).
    Numerical = 1,
    /// Invalid design, data or argument.
    Validation = 2,
    /// A required pointer argument was null.
    NullArgument = 3,
    /// A string argument was not valid UTF-8.
    Utf8 = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> GphcStatus {
    match err.exit_code() {
        2 => GphcStatus::Validation,
        _ => GphcStatus::Numerical,
    }
}

fn fail(err: Error) -> GphcStatus {
    let s = status_of(&err);
    set_error(&err.to_string());
    s
}

/// Copy the last error message into `buf` (null-terminated, truncated to
/// `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes (or be null).
#[no_mangle]
pub unsafe extern "C" fn gphc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                // Always terminate.
                *buf.add(n - 1) = 0;
            }
        }
        bytes.len() - 1
    })
}

/// Opaque censored sample.
pub struct GphcSampleHandle {
    inner: GphcSample,
}

/// Opaque exact-distribution evaluator for one design, model and target.
pub struct GphcMixtureHandle {
    _dist: SchemeDistribution,
    mixture: SignedGammaMixture,
}

unsafe fn scheme_from_raw(
    n: u32,
    m: u32,
    k: u32,
    deadline: f64,
    removals: *const u32,
    removals_len: usize,
) -> Result<CensoringScheme, Error> {
    if removals.is_null() {
        return Err(Error::InvalidArgument("removals pointer is null".into()));
    }
    let r = unsafe { slice::from_raw_parts(removals, removals_len) };
    CensoringScheme::new(n, m, k, deadline, r.to_vec())
}

fn target_from(code: i32) -> Result<Target, Error> {
    match code {
        1 => Ok(Target::Theta1),
        2 => Ok(Target::Theta2),
        other => Err(Error::InvalidArgument(format!(
            "target must be 1 or 2, got {other}"
        ))),
    }
}

/// Parse a CSV text (`z,cause[,removed]` header) under an explicit design.
///
/// # Safety
/// `csv_text` must be a valid null-terminated string, `removals` must point
/// to `removals_len` readable u32 values, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gphc_sample_from_csv(
    csv_text: *const c_char,
    n: u32,
    m: u32,
    k: u32,
    deadline: f64,
    removals: *const u32,
    removals_len: usize,
    out: *mut *mut GphcSampleHandle,
) -> GphcStatus {
    if csv_text.is_null() || out.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let text = match unsafe { CStr::from_ptr(csv_text) }.to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("csv text is not valid UTF-8");
            return GphcStatus::Utf8;
        }
    };
    let build = (|| -> Result<GphcSample, Error> {
        let scheme = unsafe { scheme_from_raw(n, m, k, deadline, removals, removals_len) }?;
        let pairs = parse_csv_observations(text)?;
        sample_from_pairs(&pairs, &scheme)
    })();
    match build {
        Ok(sample) => {
            unsafe { *out = Box::into_raw(Box::new(GphcSampleHandle { inner: sample })) };
            GphcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The bundled irradiated-mice dataset (n=77, k=20, m=25, T=700).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gphc_sample_builtin_hoel(out: *mut *mut GphcSampleHandle) -> GphcStatus {
    if out.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let sample = gphc::data::hoel_gphc_sample();
    unsafe { *out = Box::into_raw(Box::new(GphcSampleHandle { inner: sample })) };
    GphcStatus::Ok
}

/// Simulate one sample from mean lifetimes (theta1, theta2) under the design.
///
/// # Safety
/// `removals` must point to `removals_len` readable values; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_simulate(
    n: u32,
    m: u32,
    k: u32,
    deadline: f64,
    removals: *const u32,
    removals_len: usize,
    theta1: f64,
    theta2: f64,
    seed: u64,
    out: *mut *mut GphcSampleHandle,
) -> GphcStatus {
    if out.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let build = (|| -> Result<GphcSample, Error> {
        let scheme = unsafe { scheme_from_raw(n, m, k, deadline, removals, removals_len) }?;
        let model = gphc::estimation::ExpCompetingModel::new(theta1, theta2)?;
        Ok(generate_sample(
            &model,
            &scheme,
            &mut replication_rng(seed, 0),
        ))
    })();
    match build {
        Ok(sample) => {
            unsafe { *out = Box::into_raw(Box::new(GphcSampleHandle { inner: sample })) };
            GphcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Release a sample handle.
///
/// # Safety
/// `h` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gphc_sample_free(h: *mut GphcSampleHandle) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Sufficient statistics of a sample.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_sample_stats(
    h: *const GphcSampleHandle,
    j: *mut u32,
    d1: *mut u32,
    d2: *mut u32,
    w: *mut f64,
) -> GphcStatus {
    if h.is_null() || j.is_null() || d1.is_null() || d2.is_null() || w.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let s = unsafe { &(*h).inner };
    unsafe {
        *j = s.j;
        *d1 = s.d1;
        *d2 = s.d2;
        *w = s.w;
    }
    GphcStatus::Ok
}

/// MLEs W/D1 and W/D2. A nonexistent estimate is reported as NaN with its
/// flag cleared.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_fit(
    h: *const GphcSampleHandle,
    theta1: *mut f64,
    theta1_exists: *mut i32,
    theta2: *mut f64,
    theta2_exists: *mut i32,
) -> GphcStatus {
    if h.is_null()
        || theta1.is_null()
        || theta2.is_null()
        || theta1_exists.is_null()
        || theta2_exists.is_null()
    {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let fit = fit_mle(unsafe { &(*h).inner });
    unsafe {
        *theta1 = fit.theta1.unwrap_or(f64::NAN);
        *theta1_exists = fit.theta1.is_some() as i32;
        *theta2 = fit.theta2.unwrap_or(f64::NAN);
        *theta2_exists = fit.theta2.is_some() as i32;
    }
    GphcStatus::Ok
}

/// Exact confidence interval for `target` (1 or 2) at level `1 - alpha`,
/// nuisance at its MLE. When no finite upper limit exists, `exists` is 0 and
/// `upper` is NaN (the lower endpoint is still reported).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_exact_ci(
    h: *const GphcSampleHandle,
    target: i32,
    alpha: f64,
    lower: *mut f64,
    upper: *mut f64,
    exists: *mut i32,
) -> GphcStatus {
    if h.is_null() || lower.is_null() || upper.is_null() || exists.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let run = (|| -> Result<gphc::intervals::IntervalResult, Error> {
        exact_ci(
            unsafe { &(*h).inner },
            target_from(target)?,
            alpha,
            OtherThetaPolicy::PlugInMle,
        )
    })();
    match run {
        Ok(ci) => {
            unsafe {
                *lower = ci.lower.unwrap_or(f64::NAN);
                *upper = ci.upper.unwrap_or(f64::NAN);
                *exists = ci.exists as i32;
            }
            GphcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Parametric bootstrap percentile interval (B replicates, seeded).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_bootstrap_ci(
    h: *const GphcSampleHandle,
    target: i32,
    alpha: f64,
    b: u32,
    seed: u64,
    lower: *mut f64,
    upper: *mut f64,
) -> GphcStatus {
    if h.is_null() || lower.is_null() || upper.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let run = (|| -> Result<gphc::intervals::IntervalResult, Error> {
        bootstrap_ci(unsafe { &(*h).inner }, target_from(target)?, alpha, b, seed)
    })();
    match run {
        Ok(ci) => {
            unsafe {
                *lower = ci.lower.unwrap_or(f64::NAN);
                *upper = ci.upper.unwrap_or(f64::NAN);
            }
            GphcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Bayes point estimates of the mean lifetimes under a Beta-Gamma prior
/// (b0, a0, a1, a2).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_bayes_estimates(
    h: *const GphcSampleHandle,
    b0: f64,
    a0: f64,
    a1: f64,
    a2: f64,
    theta1: *mut f64,
    theta2: *mut f64,
) -> GphcStatus {
    if h.is_null() || theta1.is_null() || theta2.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let run = (|| -> Result<(f64, f64), Error> {
        let prior = BetaGammaParams::new(b0, a0, a1, a2)?;
        bayes_estimates(&posterior(&prior, unsafe { &(*h).inner }))
    })();
    match run {
        Ok((t1, t2)) => {
            unsafe {
                *theta1 = t1;
                *theta2 = t2;
            }
            GphcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// HPD credible interval by direct posterior sampling. `g` selects the
/// transform: 1 theta1, 2 theta2, 3 lambda1, 4 lambda2, 5 lambda1/lambda2.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_hpd_interval(
    h: *const GphcSampleHandle,
    b0: f64,
    a0: f64,
    a1: f64,
    a2: f64,
    g: i32,
    alpha: f64,
    draws: usize,
    seed: u64,
    lower: *mut f64,
    upper: *mut f64,
) -> GphcStatus {
    if h.is_null() || lower.is_null() || upper.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let run = (|| -> Result<(f64, f64), Error> {
        let gf = match g {
            1 => GFunction::Theta1,
            2 => GFunction::Theta2,
            3 => GFunction::Lambda1,
            4 => GFunction::Lambda2,
            5 => GFunction::RateRatio,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown transform code {other}"
                )))
            }
        };
        let prior = BetaGammaParams::new(b0, a0, a1, a2)?;
        hpd_interval(
            &posterior(&prior, unsafe { &(*h).inner }),
            gf,
            alpha,
            draws,
            seed,
        )
    })();
    match run {
        Ok((lo, hi)) => {
            unsafe {
                *lower = lo;
                *upper = hi;
            }
            GphcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Build the exact conditional distribution of one MLE under a design and
/// model.
///
/// # Safety
/// `removals` must point to `removals_len` readable values; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_mixture_new(
    n: u32,
    m: u32,
    k: u32,
    deadline: f64,
    removals: *const u32,
    removals_len: usize,
    theta1: f64,
    theta2: f64,
    target: i32,
    out: *mut *mut GphcMixtureHandle,
) -> GphcStatus {
    if out.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let build = (|| -> Result<GphcMixtureHandle, Error> {
        let scheme = unsafe { scheme_from_raw(n, m, k, deadline, removals, removals_len) }?;
        let model = gphc::estimation::ExpCompetingModel::new(theta1, theta2)?;
        let dist = SchemeDistribution::new(&scheme)?;
        let mixture = dist.mixture(&model, target_from(target)?);
        Ok(GphcMixtureHandle {
            _dist: dist,
            mixture,
        })
    })();
    match build {
        Ok(handle) => {
            unsafe { *out = Box::into_raw(Box::new(handle)) };
            GphcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Conditional density and CDF of the MLE at `x`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_mixture_eval(
    h: *const GphcMixtureHandle,
    x: f64,
    pdf: *mut f64,
    cdf: *mut f64,
) -> GphcStatus {
    if h.is_null() || pdf.is_null() || cdf.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    let mix = unsafe { &(*h).mixture };
    match (mix.pdf(x), mix.cdf(x)) {
        (Ok(p), Ok(c)) => {
            unsafe {
                *pdf = p;
                *cdf = c;
            }
            GphcStatus::Ok
        }
        (Err(e), _) | (_, Err(e)) => fail(e),
    }
}

/// P(no failure of the target cause), the conditioning complement.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gphc_mixture_prob_zero(
    h: *const GphcMixtureHandle,
    prob: *mut f64,
) -> GphcStatus {
    if h.is_null() || prob.is_null() {
        set_error("null argument");
        return GphcStatus::NullArgument;
    }
    unsafe { *prob = (*h).mixture.prob_zero() };
    GphcStatus::Ok
}

/// Release a mixture handle.
///
/// # Safety
/// `h` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gphc_mixture_free(h: *mut GphcMixtureHandle) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}
