//! C ABI over the `cogload` calibration engine.
//!
//! Handles are opaque pointers created and released by this library. Every
//! fallible function returns a [`CogloadStatus`]; on failure the message of
//! the most recent error on the calling thread is available from
//! [`cogload_last_error_message`]. Strings returned by accessors are owned by
//! their handle and stay valid until the handle is freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cogload::irt::{self, CalibrationConfig, CalibrationResult, MatrixBuilder};
use cogload::{proxy, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CogloadStatus {
    Ok = 0,
    InvalidArgument = 1,
    InconsistentInput = 2,
    EmptyAfterReduction = 3,
    NumericalFailure = 4,
    NullPointer = 5,
    InvalidUtf8 = 6,
    IndexOutOfRange = 7,
    Panic = 8,
    Other = 9,
}

/// Calibration settings; obtain defaults from
/// [`cogload_calibration_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CogloadCalibrationConfig {
    pub max_iterations: usize,
    pub convergence_tolerance: f64,
    pub newton_damping: f64,
    pub theta_bound: f64,
}

impl From<CogloadCalibrationConfig> for CalibrationConfig {
    fn from(c: CogloadCalibrationConfig) -> Self {
        Self {
            max_iterations: c.max_iterations,
            convergence_tolerance: c.convergence_tolerance,
            newton_damping: c.newton_damping,
            theta_bound: c.theta_bound,
        }
    }
}

/// Accumulates learner-item responses.
pub struct CogloadMatrixBuilder {
    inner: MatrixBuilder,
}

/// A finished calibration.
pub struct CogloadCalibration {
    result: CalibrationResult,
    item_ids: Vec<CString>,
    learner_ids: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn fail(status: CogloadStatus, message: &str) -> CogloadStatus {
    set_last_error(message);
    status
}

fn status_of(err: &Error) -> CogloadStatus {
    let status = match err {
        Error::InvalidArgument(_) => CogloadStatus::InvalidArgument,
        Error::InconsistentInput(_) => CogloadStatus::InconsistentInput,
        Error::EmptyAfterReduction => CogloadStatus::EmptyAfterReduction,
        Error::NumericalFailure { .. } => CogloadStatus::NumericalFailure,
        _ => CogloadStatus::Other,
    };
    fail(status, &err.to_string())
}

fn guard(f: impl FnOnce() -> CogloadStatus) -> CogloadStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(CogloadStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, CogloadStatus> {
    if p.is_null() {
        return Err(fail(CogloadStatus::NullPointer, &format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CogloadStatus::InvalidUtf8, &format!("{name} is not valid UTF-8")))
}

fn to_cstrings<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<CString> {
    ids.map(|s| CString::new(s).unwrap_or_default()).collect()
}

/// Message of the last failure on this thread; empty when none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cogload_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Writes `1 / (1 + exp(-(theta - b)))` to `out`.
///
/// # Safety
/// `out` must be null or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn cogload_rasch_probability(theta: f64, b: f64, out: *mut f64) -> CogloadStatus {
    if out.is_null() {
        return fail(CogloadStatus::NullPointer, "out is null");
    }
    guard(|| match irt::rasch_probability(theta, b) {
        Ok(p) => {
            *out = p;
            CogloadStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

#[no_mangle]
pub extern "C" fn cogload_matrix_builder_new() -> *mut CogloadMatrixBuilder {
    Box::into_raw(Box::new(CogloadMatrixBuilder {
        inner: MatrixBuilder::default(),
    }))
}

/// Adds one response. A repeated learner-item pair is rejected.
///
/// # Safety
/// `builder` must come from [`cogload_matrix_builder_new`]; the ids must be
/// null or NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn cogload_matrix_builder_add(
    builder: *mut CogloadMatrixBuilder,
    learner_id: *const c_char,
    item_id: *const c_char,
    correct: bool,
) -> CogloadStatus {
    if builder.is_null() {
        return fail(CogloadStatus::NullPointer, "builder is null");
    }
    let learner = match read_str(learner_id, "learner_id") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let item = match read_str(item_id, "item_id") {
        Ok(s) => s,
        Err(status) => return status,
    };
    guard(|| match (*builder).inner.push(learner, item, correct) {
        Ok(()) => CogloadStatus::Ok,
        Err(e) => status_of(&e),
    })
}

/// Number of responses added so far; 0 for a null builder.
///
/// # Safety
/// `builder` must be null or come from [`cogload_matrix_builder_new`].
#[no_mangle]
pub unsafe extern "C" fn cogload_matrix_builder_len(builder: *const CogloadMatrixBuilder) -> usize {
    builder.as_ref().map_or(0, |b| b.inner.len())
}

/// # Safety
/// `builder` must be null or come from [`cogload_matrix_builder_new`] and not
/// have been freed.
#[no_mangle]
pub unsafe extern "C" fn cogload_matrix_builder_free(builder: *mut CogloadMatrixBuilder) {
    if !builder.is_null() {
        drop(Box::from_raw(builder));
    }
}

#[no_mangle]
pub extern "C" fn cogload_calibration_config_default() -> CogloadCalibrationConfig {
    let d = CalibrationConfig::default();
    CogloadCalibrationConfig {
        max_iterations: d.max_iterations,
        convergence_tolerance: d.convergence_tolerance,
        newton_damping: d.newton_damping,
        theta_bound: d.theta_bound,
    }
}

/// Runs joint maximum likelihood on the builder's responses. The builder is
/// left untouched and may be reused or freed. On success `*out` receives a
/// handle to release with [`cogload_calibration_free`].
///
/// # Safety
/// `builder` must come from [`cogload_matrix_builder_new`]; `config` must be
/// null (defaults) or point to a valid config; `out` must be valid for one
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn cogload_calibrate(
    builder: *const CogloadMatrixBuilder,
    config: *const CogloadCalibrationConfig,
    out: *mut *mut CogloadCalibration,
) -> CogloadStatus {
    if builder.is_null() || out.is_null() {
        return fail(CogloadStatus::NullPointer, "builder or out is null");
    }
    *out = ptr::null_mut();
    let config: CalibrationConfig = match config.as_ref() {
        Some(c) => (*c).into(),
        None => CalibrationConfig::default(),
    };
    guard(|| {
        let matrix = (*builder).inner.clone().build();
        match irt::calibrate_jml(&matrix, &config) {
            Ok(result) => {
                let item_ids = to_cstrings(result.items.iter().map(|p| p.item_id.as_str()));
                let learner_ids = to_cstrings(result.abilities.iter().map(|a| a.learner_id.as_str()));
                *out = Box::into_raw(Box::new(CogloadCalibration {
                    result,
                    item_ids,
                    learner_ids,
                }));
                CogloadStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `cal` must be null or a live handle from [`cogload_calibrate`].
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_item_count(cal: *const CogloadCalibration) -> usize {
    cal.as_ref().map_or(0, |c| c.result.items.len())
}

/// # Safety
/// `cal` must be null or a live handle from [`cogload_calibrate`].
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_learner_count(cal: *const CogloadCalibration) -> usize {
    cal.as_ref().map_or(0, |c| c.result.abilities.len())
}

/// # Safety
/// `cal` must be null or a live handle from [`cogload_calibrate`].
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_exclusion_count(cal: *const CogloadCalibration) -> usize {
    cal.as_ref().map_or(0, |c| c.result.exclusions.len())
}

/// Item id at `index`, or null when out of range.
///
/// # Safety
/// `cal` must be null or a live handle from [`cogload_calibrate`].
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_item_id(cal: *const CogloadCalibration, index: usize) -> *const c_char {
    cal.as_ref()
        .and_then(|c| c.item_ids.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Learner id at `index`, or null when out of range.
///
/// # Safety
/// `cal` must be null or a live handle from [`cogload_calibrate`].
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_learner_id(cal: *const CogloadCalibration, index: usize) -> *const c_char {
    cal.as_ref()
        .and_then(|c| c.learner_ids.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

unsafe fn read_indexed(
    cal: *const CogloadCalibration,
    index: usize,
    out: *mut f64,
    pick: impl FnOnce(&CalibrationResult, usize) -> Option<f64>,
) -> CogloadStatus {
    let Some(c) = cal.as_ref() else {
        return fail(CogloadStatus::NullPointer, "calibration is null");
    };
    if out.is_null() {
        return fail(CogloadStatus::NullPointer, "out is null");
    }
    match pick(&c.result, index) {
        Some(v) => {
            *out = v;
            CogloadStatus::Ok
        }
        None => fail(CogloadStatus::IndexOutOfRange, &format!("index {index} out of range")),
    }
}

/// # Safety
/// `cal` must be a live handle; `out` valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_item_difficulty(
    cal: *const CogloadCalibration,
    index: usize,
    out: *mut f64,
) -> CogloadStatus {
    read_indexed(cal, index, out, |r, i| r.items.get(i).map(|p| p.b))
}

/// # Safety
/// `cal` must be a live handle; `out` valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_item_standard_error(
    cal: *const CogloadCalibration,
    index: usize,
    out: *mut f64,
) -> CogloadStatus {
    read_indexed(cal, index, out, |r, i| r.standard_errors.get(i).copied())
}

/// # Safety
/// `cal` must be a live handle; `out` valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_item_responses(
    cal: *const CogloadCalibration,
    index: usize,
    out: *mut usize,
) -> CogloadStatus {
    let Some(c) = cal.as_ref() else {
        return fail(CogloadStatus::NullPointer, "calibration is null");
    };
    if out.is_null() {
        return fail(CogloadStatus::NullPointer, "out is null");
    }
    match c.result.responses_per_item.get(index) {
        Some(&n) => {
            *out = n;
            CogloadStatus::Ok
        }
        None => fail(CogloadStatus::IndexOutOfRange, &format!("index {index} out of range")),
    }
}

/// # Safety
/// `cal` must be a live handle; `out` valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_learner_ability(
    cal: *const CogloadCalibration,
    index: usize,
    out: *mut f64,
) -> CogloadStatus {
    read_indexed(cal, index, out, |r, i| r.abilities.get(i).map(|a| a.theta))
}

/// # Safety
/// `cal` must be null or a live handle from [`cogload_calibrate`].
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_converged(cal: *const CogloadCalibration) -> bool {
    cal.as_ref().is_some_and(|c| c.result.converged)
}

/// # Safety
/// `cal` must be null or a live handle from [`cogload_calibrate`].
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_iterations(cal: *const CogloadCalibration) -> usize {
    cal.as_ref().map_or(0, |c| c.result.iterations_used)
}

/// Final joint log-likelihood; NaN for a null handle.
///
/// # Safety
/// `cal` must be null or a live handle from [`cogload_calibrate`].
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_log_likelihood(cal: *const CogloadCalibration) -> f64 {
    cal.as_ref().map_or(f64::NAN, |c| c.result.final_log_likelihood)
}

/// # Safety
/// `cal` must be null or a live handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn cogload_calibration_free(cal: *mut CogloadCalibration) {
    if !cal.is_null() {
        drop(Box::from_raw(cal));
    }
}

/// Min-max standardizes `n` values into `out` (which may alias `values`).
/// A constant series maps to 0.5.
///
/// # Safety
/// `values` and `out` must be valid for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn cogload_minmax_standardize(values: *const f64, n: usize, out: *mut f64) -> CogloadStatus {
    if values.is_null() || out.is_null() {
        return fail(CogloadStatus::NullPointer, "values or out is null");
    }
    let input = std::slice::from_raw_parts(values, n).to_vec();
    guard(|| match proxy::minmax_standardize(&input) {
        Ok(series) => {
            std::slice::from_raw_parts_mut(out, n).copy_from_slice(&series.values);
            CogloadStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Writes `diff_std + el_std` to `raw` and half of it to `standardized`.
///
/// # Safety
/// `raw` and `standardized` must be valid for one `double` write each.
#[no_mangle]
pub unsafe extern "C" fn cogload_combined_load(
    diff_std: f64,
    el_std: f64,
    raw: *mut f64,
    standardized: *mut f64,
) -> CogloadStatus {
    if raw.is_null() || standardized.is_null() {
        return fail(CogloadStatus::NullPointer, "raw or standardized is null");
    }
    guard(|| match proxy::combined_load(diff_std, el_std) {
        Ok((r, s)) => {
            *raw = r;
            *standardized = s;
            CogloadStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}
