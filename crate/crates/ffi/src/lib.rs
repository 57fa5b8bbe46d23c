//! C ABI for bootlasso.
//!
//! Objects are opaque handles released with their `_free` function. Every
//! fallible call returns a [`BlStatus`]; on failure the message is available
//! from [`bl_last_error_message`] on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bootlasso::tuner::{SelectionRule, TuningConfig};
use bootlasso::weights::SchemeFlag;
use bootlasso::{Dataset, Error, TuningResult};
use ndarray::{Array1, Array2};

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DegenerateData = 3,
    DidNotConverge = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

/// Standardized design matrix and centered response.
pub struct BlDataset {
    inner: Dataset,
}

/// Outcome of one penalty-tuning run.
pub struct BlTuningResult {
    inner: TuningResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> BlStatus {
    if e.is_degenerate_data() {
        return BlStatus::DegenerateData;
    }
    match e {
        Error::DidNotConverge { .. } => BlStatus::DidNotConverge,
        Error::PathPoint { source, .. } | Error::Replicate { source, .. } => status_of(source),
        Error::Io(_) => BlStatus::Internal,
        _ => BlStatus::InvalidInput,
    }
}

fn fail(status: BlStatus, msg: &str) -> BlStatus {
    set_error(msg);
    status
}

fn guard<F: FnOnce() -> BlStatus>(f: F) -> BlStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(BlStatus::Internal, "internal panic"),
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn bl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Soft-thresholding operator `sign(z) * max(|z| - t, 0)`.
#[no_mangle]
pub extern "C" fn bl_soft_threshold(z: f64, t: f64) -> f64 {
    bootlasso::soft_threshold(z, t)
}

/// Standardizes a row-major `n x p` matrix `x` and response `y` into a new
/// dataset handle.
///
/// # Safety
/// `x` must point to `n * p` doubles, `y` to `n` doubles, `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_dataset_new(
    x: *const f64,
    n: usize,
    p: usize,
    y: *const f64,
    out: *mut *mut BlDataset,
) -> BlStatus {
    guard(|| {
        if x.is_null() || y.is_null() || out.is_null() {
            return fail(BlStatus::NullPointer, "null pointer argument");
        }
        *out = ptr::null_mut();
        let Some(len) = n.checked_mul(p) else {
            return fail(BlStatus::InvalidInput, "n * p overflows");
        };
        if n == 0 || p == 0 {
            return fail(BlStatus::InvalidInput, "empty design matrix");
        }
        let xs = std::slice::from_raw_parts(x, len).to_vec();
        let ys = std::slice::from_raw_parts(y, n).to_vec();
        let xa = match Array2::from_shape_vec((n, p), xs) {
            Ok(a) => a,
            Err(e) => return fail(BlStatus::InvalidInput, &e.to_string()),
        };
        match bootlasso::standardize(&xa, &Array1::from(ys)) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(BlDataset { inner: d }));
                BlStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// # Safety
/// `data` must be NULL or a handle from [`bl_dataset_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bl_dataset_free(data: *mut BlDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of observations, or 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn bl_dataset_n(data: *const BlDataset) -> usize {
    data.as_ref().map_or(0, |d| d.inner.n())
}

/// Number of covariates, or 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn bl_dataset_p(data: *const BlDataset) -> usize {
    data.as_ref().map_or(0, |d| d.inner.p())
}

/// Tunes the penalty with `b` weighted-bootstrap replicates of `scheme`
/// (`beta:a,b`, `kfold:k`, `paired` or `mofn:f`) on the default 100-point
/// grid, computing both the minimum and one-SE selections.
///
/// # Safety
/// `data` must be a live dataset handle, `scheme` a NUL-terminated string and
/// `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_tune(
    data: *const BlDataset,
    scheme: *const c_char,
    b: usize,
    seed: u64,
    out: *mut *mut BlTuningResult,
) -> BlStatus {
    guard(|| {
        let (Some(d), false, false) = (data.as_ref(), scheme.is_null(), out.is_null()) else {
            return fail(BlStatus::NullPointer, "null pointer argument");
        };
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(scheme).to_str() else {
            return fail(BlStatus::InvalidInput, "scheme is not UTF-8");
        };
        let resolved = text.parse::<SchemeFlag>().and_then(|f| f.resolve(d.inner.n()));
        let scheme = match resolved {
            Ok(s) => s,
            Err(e) => return fail(status_of(&e), &e.to_string()),
        };
        let mut config = TuningConfig::new(scheme, b, seed);
        if b < 2 {
            config.rules = vec![SelectionRule::Min];
        }
        match bootlasso::run_weighted_bootstrap(&d.inner, &config) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(BlTuningResult { inner: r }));
                BlStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// # Safety
/// `result` must be NULL or a handle from [`bl_tune`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bl_result_free(result: *mut BlTuningResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Penalty chosen by the minimum rule.
///
/// # Safety
/// `result` must be a live result handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_result_lambda_min(result: *const BlTuningResult, out: *mut f64) -> BlStatus {
    guard(|| match (result.as_ref(), out.is_null()) {
        (Some(r), false) => {
            *out = r.inner.lambda_min;
            BlStatus::Ok
        }
        _ => fail(BlStatus::NullPointer, "null pointer argument"),
    })
}

/// Penalty chosen by the one-standard-error rule; `InvalidInput` when the
/// rule was not computed (fewer than two replicates).
///
/// # Safety
/// `result` must be a live result handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_result_lambda_one_se(result: *const BlTuningResult, out: *mut f64) -> BlStatus {
    guard(|| match (result.as_ref(), out.is_null()) {
        (Some(r), false) => match r.inner.lambda_one_se {
            Some(l) => {
                *out = l;
                BlStatus::Ok
            }
            None => fail(BlStatus::InvalidInput, "one-SE rule was not computed"),
        },
        _ => fail(BlStatus::NullPointer, "null pointer argument"),
    })
}

/// Realized mean training-weight fraction.
///
/// # Safety
/// `result` must be a live result handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_result_rho(result: *const BlTuningResult, out: *mut f64) -> BlStatus {
    guard(|| match (result.as_ref(), out.is_null()) {
        (Some(r), false) => {
            *out = r.inner.rho;
            BlStatus::Ok
        }
        _ => fail(BlStatus::NullPointer, "null pointer argument"),
    })
}

/// Number of grid points, or 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn bl_result_grid_len(result: *const BlTuningResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.curve.len())
}

/// Copies the λ grid and the total test-weighted error into caller buffers
/// of length `len`, which must be at least [`bl_result_grid_len`].
///
/// # Safety
/// `lambdas` and `mspe` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bl_result_curve(
    result: *const BlTuningResult,
    lambdas: *mut f64,
    mspe: *mut f64,
    len: usize,
) -> BlStatus {
    guard(|| {
        let (Some(r), false, false) = (result.as_ref(), lambdas.is_null(), mspe.is_null()) else {
            return fail(BlStatus::NullPointer, "null pointer argument");
        };
        let c = &r.inner.curve;
        if len < c.len() {
            return fail(BlStatus::BufferTooSmall, &format!("need {} entries", c.len()));
        }
        std::slice::from_raw_parts_mut(lambdas, c.len()).copy_from_slice(&c.lambdas);
        for (k, v) in c.total_mspe.iter().enumerate() {
            *mspe.add(k) = *v;
        }
        BlStatus::Ok
    })
}

/// Writes the 0-based active-set indices at the minimum-rule penalty into
/// `indices` (capacity `cap`) and the set size into `len`. With a NULL
/// `indices` only the size is reported.
///
/// # Safety
/// `indices` must be NULL or point to `cap` writable entries; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_result_active_set_min(
    result: *const BlTuningResult,
    indices: *mut usize,
    cap: usize,
    len: *mut usize,
) -> BlStatus {
    guard(|| {
        let (Some(r), false) = (result.as_ref(), len.is_null()) else {
            return fail(BlStatus::NullPointer, "null pointer argument");
        };
        let set = &r.inner.min.active_set.indices;
        *len = set.len();
        if indices.is_null() {
            return BlStatus::Ok;
        }
        if cap < set.len() {
            return fail(BlStatus::BufferTooSmall, &format!("need {} entries", set.len()));
        }
        std::slice::from_raw_parts_mut(indices, set.len()).copy_from_slice(set);
        BlStatus::Ok
    })
}
