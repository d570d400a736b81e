//! C interface to `coupon-core`.
//!
//! Distributions live behind an opaque `CouponDistribution` handle. Every
//! fallible call returns a `CouponStatus`; on failure the message is kept per
//! thread and read with `coupon_last_error_message`. Strings returned by the
//! library are released with `coupon_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coupon_core::collector::{expectation, expectation_uniform, second_moment, tail_curve, TailMethod};
use coupon_core::combinatorics::Limits;
use coupon_core::scalar::format_rational;
use coupon_core::{ArithmeticMode, DrawDistribution, Error, Value};

/// Opaque distribution handle.
pub struct CouponDistribution {
    inner: DrawDistribution,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouponStatus {
    Ok = 0,
    InvalidArgument = 1,
    CapExceeded = 2,
    NullPointer = 3,
    BufferTooSmall = 4,
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CouponStatus, message: impl Into<String>) -> CouponStatus {
    set_error(message.into());
    status
}

fn from_error(e: Error) -> CouponStatus {
    let status = if e.is_cap() {
        CouponStatus::CapExceeded
    } else {
        CouponStatus::InvalidArgument
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> CouponStatus) -> CouponStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(CouponStatus::Internal, "internal panic"),
    }
}

unsafe fn handle<'a>(d: *const CouponDistribution) -> Option<&'a DrawDistribution> {
    d.as_ref().map(|d| &d.inner)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn coupon_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a distribution from `len` doubles `p_1..p_n`.
///
/// # Safety
/// `weights` must point to `len` readable doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn coupon_distribution_new_f64(
    weights: *const f64,
    len: usize,
    out: *mut *mut CouponDistribution,
) -> CouponStatus {
    guard(|| {
        if weights.is_null() || out.is_null() {
            return fail(CouponStatus::NullPointer, "null argument");
        }
        let slice = std::slice::from_raw_parts(weights, len);
        match DrawDistribution::from_f64(slice) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CouponDistribution { inner }));
                CouponStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Builds a distribution from a comma separated list such as `"1/4,0.3"`.
///
/// # Safety
/// `list` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coupon_distribution_new_rational(
    list: *const c_char,
    out: *mut *mut CouponDistribution,
) -> CouponStatus {
    guard(|| {
        if list.is_null() || out.is_null() {
            return fail(CouponStatus::NullPointer, "null argument");
        }
        let Ok(text) = CStr::from_ptr(list).to_str() else {
            return fail(CouponStatus::InvalidArgument, "list is not UTF-8");
        };
        match DrawDistribution::parse(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CouponDistribution { inner }));
                CouponStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `d` must come from a constructor above and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coupon_distribution_free(d: *mut CouponDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of non-null coupons, 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coupon_distribution_len(d: *const CouponDistribution) -> usize {
    handle(d).map_or(0, |d| d.len())
}

/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coupon_distribution_null_mass(d: *const CouponDistribution, out: *mut f64) -> CouponStatus {
    guard(|| {
        let (Some(d), false) = (handle(d), out.is_null()) else {
            return fail(CouponStatus::NullPointer, "null argument");
        };
        *out = Value::Exact(d.null_mass()).to_f64();
        CouponStatus::Ok
    })
}

fn float_curve(d: &DrawDistribution, c: usize, k_max: usize) -> Result<Vec<f64>, CouponStatus> {
    tail_curve(d, c, k_max, ArithmeticMode::Float, TailMethod::ClosedForm, &Limits::default())
        .map(|curve| curve.tail.iter().map(Value::to_f64).collect())
        .map_err(from_error)
}

/// `Pr{T > k}` for collecting `c` coupons, in double precision.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coupon_tail_f64(d: *const CouponDistribution, c: usize, k: usize, out: *mut f64) -> CouponStatus {
    guard(|| {
        let (Some(d), false) = (handle(d), out.is_null()) else {
            return fail(CouponStatus::NullPointer, "null argument");
        };
        match float_curve(d, c, k) {
            Ok(curve) => {
                *out = curve[k];
                CouponStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Writes `Pr{T > k}` for `k = 0..=k_max` into `out[0..=k_max]`.
///
/// # Safety
/// `d` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn coupon_tail_curve_f64(
    d: *const CouponDistribution,
    c: usize,
    k_max: usize,
    out: *mut f64,
    out_len: usize,
) -> CouponStatus {
    guard(|| {
        let (Some(d), false) = (handle(d), out.is_null()) else {
            return fail(CouponStatus::NullPointer, "null argument");
        };
        if out_len <= k_max {
            return fail(CouponStatus::BufferTooSmall, format!("need {} slots, got {out_len}", k_max + 1));
        }
        match float_curve(d, c, k_max) {
            Ok(curve) => {
                std::slice::from_raw_parts_mut(out, out_len)[..curve.len()].copy_from_slice(&curve);
                CouponStatus::Ok
            }
            Err(s) => s,
        }
    })
}

fn exact_string(v: Value) -> *mut c_char {
    let text = match v {
        Value::Exact(r) => format_rational(&r),
        Value::Float(x) => x.to_string(),
    };
    CString::new(text).expect("no nul").into_raw()
}

/// Exact `Pr{T > k}` as a `"a/b"` string; free it with `coupon_string_free`.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coupon_tail_exact(
    d: *const CouponDistribution,
    c: usize,
    k: usize,
    out: *mut *mut c_char,
) -> CouponStatus {
    guard(|| {
        let (Some(d), false) = (handle(d), out.is_null()) else {
            return fail(CouponStatus::NullPointer, "null argument");
        };
        match tail_curve(d, c, k, ArithmeticMode::Exact, TailMethod::ClosedForm, &Limits::default()) {
            Ok(curve) => {
                *out = exact_string(curve.tail.into_iter().last().expect("k + 1 entries"));
                CouponStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn coupon_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn moment(
    d: *const CouponDistribution,
    c: usize,
    out: *mut f64,
    f: fn(&DrawDistribution, usize, ArithmeticMode) -> coupon_core::Result<Value>,
) -> CouponStatus {
    guard(|| {
        let (Some(d), false) = (handle(d), out.is_null()) else {
            return fail(CouponStatus::NullPointer, "null argument");
        };
        // exact evaluation, rounded once at the end
        match f(d, c, ArithmeticMode::Exact) {
            Ok(v) => {
                *out = v.to_f64();
                CouponStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// `E(T)` for collecting `c` coupons.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coupon_expectation_f64(d: *const CouponDistribution, c: usize, out: *mut f64) -> CouponStatus {
    moment(d, c, out, expectation)
}

/// `E(T^2)` for collecting `c` coupons.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coupon_second_moment_f64(d: *const CouponDistribution, c: usize, out: *mut f64) -> CouponStatus {
    moment(d, c, out, second_moment)
}

/// `E(T)` for `c` of `n` equally likely coupons, `n (H_n - H_{n-c})`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coupon_expectation_uniform_f64(n: usize, c: usize, out: *mut f64) -> CouponStatus {
    guard(|| {
        if out.is_null() {
            return fail(CouponStatus::NullPointer, "null argument");
        }
        match expectation_uniform(n, c) {
            Ok(e) => {
                *out = Value::Exact(e).to_f64();
                CouponStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
