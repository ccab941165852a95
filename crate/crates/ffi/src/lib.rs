//! C ABI over `roughscale`.
//!
//! Every function returns an [`RsStatus`]; results go through out-pointers.
//! On failure the message is available from [`rs_last_error_message`] on the
//! same thread until the next failing call. Panics are caught at the boundary
//! and reported as [`RsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use roughscale::finite_sample::{relative_error, FiniteSampleLaw};
use roughscale::mfdfa::{self, GheCurve, MfdfaConfig};
use roughscale::multifractal_metrics;
use roughscale::scaling::{fit_ansatz, FitOptions, FrequencySweep};
use roughscale::synthetic::generate_fgn;
use roughscale::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    NumericError = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RsStatus, message: impl Into<String>) -> RsStatus {
    set_last_error(message.into());
    status
}

fn from_error(e: Error) -> RsStatus {
    let status = match e.kind() {
        ErrorKind::Usage => RsStatus::InvalidArgument,
        ErrorKind::Data => RsStatus::DataError,
        ErrorKind::Numeric => RsStatus::NumericError,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> RsStatus) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(RsStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(RsStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Density of the standardized daily return for `n` intraday samples.
///
/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn rs_finite_sample_density(n: u32, x: f64, out: *mut f64) -> RsStatus {
    non_null!(out);
    guard(
        || match FiniteSampleLaw::new(n).and_then(|l| l.density(x)) {
            Ok(v) => {
                *out = v;
                RsStatus::Ok
            }
            Err(e) => from_error(e),
        },
    )
}

/// `E[r̄^{2k}]`.
///
/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn rs_finite_sample_moment(n: u32, k: u32, out: *mut f64) -> RsStatus {
    non_null!(out);
    guard(
        || match FiniteSampleLaw::new(n).and_then(|l| l.moment_2k(k)) {
            Ok(v) => {
                *out = v;
                RsStatus::Ok
            }
            Err(e) => from_error(e),
        },
    )
}

/// `3n/(n+2)`.
///
/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn rs_finite_sample_kurtosis(n: u32, out: *mut f64) -> RsStatus {
    non_null!(out);
    guard(|| match FiniteSampleLaw::new(n) {
        Ok(l) => {
            *out = l.kurtosis();
            RsStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// `a/(n+a)`.
///
/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn rs_relative_error(n: u32, a: f64, out: *mut f64) -> RsStatus {
    non_null!(out);
    guard(|| match relative_error(n, a) {
        Ok(v) => {
            *out = v;
            RsStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// Generalized Hurst exponent curve. Opaque to C.
pub struct RsGheCurve {
    curve: GheCurve,
}

/// Runs MFDFA with default log-spaced scales on `series[0..len]` for the
/// `q_len` moments in `q`, and stores a new curve in `*out`. Release it with
/// [`rs_ghe_curve_free`].
///
/// # Safety
/// `series` and `q` must point to `len` and `q_len` readable doubles, and
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn rs_mfdfa_run(
    series: *const f64,
    len: usize,
    q: *const f64,
    q_len: usize,
    detrend_order: u32,
    out: *mut *mut RsGheCurve,
) -> RsStatus {
    non_null!(series, q, out);
    guard(|| {
        let series = std::slice::from_raw_parts(series, len);
        let q = std::slice::from_raw_parts(q, q_len);
        let result = MfdfaConfig::with_order(len, detrend_order as usize).and_then(|mut cfg| {
            cfg.q_values = q.to_vec();
            mfdfa::analyze(series, &cfg)
        });
        match result {
            Ok((_, curve)) => {
                *out = Box::into_raw(Box::new(RsGheCurve { curve }));
                RsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of points on the curve; zero for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle from [`rs_mfdfa_run`].
#[no_mangle]
pub unsafe extern "C" fn rs_ghe_curve_len(curve: *const RsGheCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.curve.points.len())
}

/// Point `index` of the curve. Any of the out-pointers may be null.
///
/// # Safety
/// `curve` must be a live handle; non-null out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_ghe_curve_get(
    curve: *const RsGheCurve,
    index: usize,
    q_out: *mut f64,
    h_out: *mut f64,
    stderr_out: *mut f64,
) -> RsStatus {
    non_null!(curve);
    guard(|| {
        let curve = &*curve;
        let Some(p) = curve.curve.points.get(index) else {
            return fail(
                RsStatus::InvalidArgument,
                format!("index {index} out of range"),
            );
        };
        if !q_out.is_null() {
            *q_out = p.q;
        }
        if !h_out.is_null() {
            *h_out = p.h;
        }
        if !stderr_out.is_null() {
            *stderr_out = p.stderr;
        }
        RsStatus::Ok
    })
}

/// `h(−k) − h(k)`; both moments must be on the curve.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_ghe_curve_delta_h(
    curve: *const RsGheCurve,
    k: f64,
    out: *mut f64,
) -> RsStatus {
    non_null!(curve, out);
    guard(|| match multifractal_metrics::delta_h(&(*curve).curve, k) {
        Ok(v) => {
            *out = v;
            RsStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// Releases a curve. Null is ignored.
///
/// # Safety
/// `curve` must be null or a handle from [`rs_mfdfa_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_ghe_curve_free(curve: *mut RsGheCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsAnsatzFit {
    pub h0: f64,
    pub a: f64,
    pub h0_stderr: f64,
    pub a_stderr: f64,
    pub residual_rms: f64,
    pub points_used: usize,
    pub weighted: bool,
    pub boundary_warning: bool,
}

/// Fits `H(Δ) = H₀·n/(n+a)` to `len` points. `stderr` may be null; the fit
/// is weighted only when it is given, every value is positive, and
/// `force_unweighted` is false.
///
/// # Safety
/// `deltas` and `h2` (and `stderr` when non-null) must hold `len` values,
/// `exclude` must hold `exclude_len` values or be null when that is zero, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_fit_ansatz(
    deltas: *const u32,
    h2: *const f64,
    stderr: *const f64,
    len: usize,
    exclude: *const u32,
    exclude_len: usize,
    force_unweighted: bool,
    out: *mut RsAnsatzFit,
) -> RsStatus {
    non_null!(deltas, h2, out);
    if exclude_len > 0 && exclude.is_null() {
        return fail(RsStatus::NullPointer, "`exclude` is null");
    }
    guard(|| {
        let deltas = std::slice::from_raw_parts(deltas, len);
        let h2 = std::slice::from_raw_parts(h2, len);
        let se = (!stderr.is_null()).then(|| std::slice::from_raw_parts(stderr, len));
        let exclude = if exclude_len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(exclude, exclude_len).to_vec()
        };
        let fit = FrequencySweep::new((0..len).map(|i| (deltas[i], h2[i], se.map(|s| s[i]))))
            .and_then(|sweep| {
                fit_ansatz(
                    &sweep,
                    &FitOptions {
                        exclude,
                        force_unweighted,
                    },
                )
            });
        match fit {
            Ok(f) => {
                *out = RsAnsatzFit {
                    h0: f.h0,
                    a: f.a,
                    h0_stderr: f.h0_stderr,
                    a_stderr: f.a_stderr,
                    residual_rms: f.residual_rms,
                    points_used: f.points_used,
                    weighted: f.weighted,
                    boundary_warning: f.boundary_warning,
                };
                RsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Writes `len` samples of fractional Gaussian noise into `out`.
///
/// # Safety
/// `out` must be valid for `len` double writes.
#[no_mangle]
pub unsafe extern "C" fn rs_generate_fgn(
    hurst: f64,
    len: usize,
    seed: u64,
    out: *mut f64,
) -> RsStatus {
    non_null!(out);
    guard(|| match generate_fgn(hurst, len, seed) {
        Ok(v) => {
            std::slice::from_raw_parts_mut(out, len).copy_from_slice(&v);
            RsStatus::Ok
        }
        Err(e) => from_error(e),
    })
}
