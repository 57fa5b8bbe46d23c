use std::ffi::{CStr, CString};
use std::ptr;

use bootlasso_ffi::*;

fn design(n: usize, p: usize) -> (Vec<f64>, Vec<f64>) {
    // Deterministic, non-collinear columns; y depends on the first two.
    let x: Vec<f64> = (0..n * p)
        .map(|k| {
            let (i, j) = (k / p, k % p);
            ((i * (j + 3) + 7 * j) % 11) as f64 + 0.1 * (i as f64).sin()
        })
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 3.0 * x[i * p] - 2.0 * x[i * p + 1] + 0.3 * (i as f64 * 1.7).cos())
        .collect();
    (x, y)
}

fn last_error() -> String {
    let p = bl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn tune_round_trip() {
    let (x, y) = design(60, 5);
    let mut data = ptr::null_mut();
    let s = unsafe { bl_dataset_new(x.as_ptr(), 60, 5, y.as_ptr(), &mut data) };
    assert_eq!(s, BlStatus::Ok);
    assert_eq!(unsafe { bl_dataset_n(data) }, 60);
    assert_eq!(unsafe { bl_dataset_p(data) }, 5);

    let scheme = CString::new("beta:1,3").unwrap();
    let mut result = ptr::null_mut();
    assert_eq!(
        unsafe { bl_tune(data, scheme.as_ptr(), 20, 4, &mut result) },
        BlStatus::Ok
    );
    assert!(bl_last_error_message().is_null());

    let (mut lmin, mut l1se, mut rho) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(bl_result_lambda_min(result, &mut lmin), BlStatus::Ok);
        assert_eq!(bl_result_lambda_one_se(result, &mut l1se), BlStatus::Ok);
        assert_eq!(bl_result_rho(result, &mut rho), BlStatus::Ok);
    }
    assert!(lmin > 0.0 && l1se >= lmin);
    assert!((rho - 0.25).abs() < 0.05, "{rho}");

    let k = unsafe { bl_result_grid_len(result) };
    assert_eq!(k, 100);
    let mut lambdas = vec![0.0; k];
    let mut mspe = vec![0.0; k];
    assert_eq!(
        unsafe { bl_result_curve(result, lambdas.as_mut_ptr(), mspe.as_mut_ptr(), k - 1) },
        BlStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { bl_result_curve(result, lambdas.as_mut_ptr(), mspe.as_mut_ptr(), k) },
        BlStatus::Ok
    );
    assert!(lambdas.windows(2).all(|w| w[0] > w[1]));
    assert!(lambdas.contains(&lmin));

    let mut len = 0;
    assert_eq!(
        unsafe { bl_result_active_set_min(result, ptr::null_mut(), 0, &mut len) },
        BlStatus::Ok
    );
    let mut idx = vec![usize::MAX; len];
    assert_eq!(
        unsafe { bl_result_active_set_min(result, idx.as_mut_ptr(), len, &mut len) },
        BlStatus::Ok
    );
    assert!(idx.contains(&0) && idx.contains(&1), "{idx:?}");

    unsafe {
        bl_result_free(result);
        bl_dataset_free(data);
    }
}

#[test]
fn constant_column_is_degenerate() {
    let x = [1.0, 2.0, 1.0, 3.0, 1.0, 4.0];
    let y = [1.0, 2.0, 3.0];
    let mut data = ptr::null_mut();
    let s = unsafe { bl_dataset_new(x.as_ptr(), 3, 2, y.as_ptr(), &mut data) };
    assert_eq!(s, BlStatus::DegenerateData);
    assert!(data.is_null());
    assert!(last_error().contains("constant"));
}

#[test]
fn bad_scheme_and_null_pointers() {
    let (x, y) = design(20, 3);
    let mut data = ptr::null_mut();
    assert_eq!(
        unsafe { bl_dataset_new(x.as_ptr(), 20, 3, y.as_ptr(), &mut data) },
        BlStatus::Ok
    );

    let bad = CString::new("beta:0,1").unwrap();
    let mut result = ptr::null_mut();
    assert_eq!(
        unsafe { bl_tune(data, bad.as_ptr(), 10, 0, &mut result) },
        BlStatus::InvalidInput
    );
    assert!(result.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { bl_tune(data, ptr::null(), 10, 0, &mut result) },
        BlStatus::NullPointer
    );
    assert_eq!(
        unsafe { bl_dataset_new(ptr::null(), 1, 1, y.as_ptr(), &mut data) },
        BlStatus::NullPointer
    );
    let mut v = 0.0;
    assert_eq!(
        unsafe { bl_result_lambda_min(ptr::null(), &mut v) },
        BlStatus::NullPointer
    );
    assert_eq!(unsafe { bl_result_grid_len(ptr::null()) }, 0);
    unsafe {
        bl_result_free(ptr::null_mut());
        bl_dataset_free(ptr::null_mut());
    }
}

#[test]
fn single_replicate_has_no_one_se() {
    let (x, y) = design(30, 3);
    let mut data = ptr::null_mut();
    assert_eq!(
        unsafe { bl_dataset_new(x.as_ptr(), 30, 3, y.as_ptr(), &mut data) },
        BlStatus::Ok
    );
    let scheme = CString::new("paired").unwrap();
    let mut result = ptr::null_mut();
    assert_eq!(
        unsafe { bl_tune(data, scheme.as_ptr(), 1, 2, &mut result) },
        BlStatus::Ok
    );
    let mut v = 0.0;
    assert_eq!(
        unsafe { bl_result_lambda_one_se(result, &mut v) },
        BlStatus::InvalidInput
    );
    assert_eq!(unsafe { bl_result_lambda_min(result, &mut v) }, BlStatus::Ok);
    unsafe {
        bl_result_free(result);
        bl_dataset_free(data);
    }
}

#[test]
fn scalar_helpers() {
    assert_eq!(bl_soft_threshold(3.0, 1.0), 2.0);
    assert_eq!(bl_soft_threshold(-3.0, 1.0), -2.0);
    assert_eq!(bl_soft_threshold(0.5, 1.0), 0.0);
    let v = unsafe { CStr::from_ptr(bl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/bootlasso.h")).unwrap();
    for name in [
        "bl_dataset_new",
        "bl_dataset_free",
        "bl_tune",
        "bl_result_lambda_min",
        "bl_result_lambda_one_se",
        "bl_result_curve",
        "bl_result_active_set_min",
        "bl_result_free",
        "bl_last_error_message",
        "BL_STATUS_DEGENERATE_DATA",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
