//! C ABI over the `lakin` analysis library.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! [`LakinStatus`]; on failure the message is kept per thread and can be
//! read with [`lakin_last_error_message`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use lakin::dataset::io::{load_labels, load_trial};
use lakin::dataset::{Leg, TrialMeta, Updrs};
use lakin::features::{amplitude_spectrum, spectrum_power};
use lakin::ml::{loocv, ClassifierConfig, EvalReport, Feature, FeatureMatrix, Method};
use lakin::pipeline::{analyze_trial, PipelineConfig, SegmentationMode, TrialAnalysis};
use lakin::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LakinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Segmentation = 6,
    Numeric = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Classifier selector for [`lakin_loocv`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LakinMethod {
    Ncc = 0,
    Knn = 1,
    Svm = 2,
}

/// Analysed trial: kinematics, segmentation and all features.
pub struct LakinTrial(TrialAnalysis);

/// Labelled feature rows.
pub struct LakinMatrix(FeatureMatrix);

/// Leave-one-out evaluation result.
pub struct LakinReport(EvalReport);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> LakinStatus {
    match e {
        Error::Io { .. } => LakinStatus::Io,
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => LakinStatus::Parse,
        Error::Validation(_) | Error::Labels { .. } | Error::UpdrsGrid(_) => LakinStatus::Validation,
        Error::InvalidArgument(_) | Error::OutOfRange { .. } => LakinStatus::InvalidArgument,
        Error::Segmentation(_) => LakinStatus::Segmentation,
        Error::ConstantFeature(_) | Error::UndefinedCorrelation(_) | Error::Degenerate { .. } => LakinStatus::Numeric,
        Error::Fold { source, .. } => status_of(source),
    }
}

fn fail(status: LakinStatus, msg: impl Into<String>) -> LakinStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), LakinStatus>) -> LakinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LakinStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(LakinStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: lakin::Result<T>) -> Result<T, LakinStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn slice<'a, T>(p: *const T, n: usize) -> Result<&'a [T], LakinStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(LakinStatus::NullPointer, "null array pointer"));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, LakinStatus> {
    if p.is_null() {
        return Err(fail(LakinStatus::NullPointer, "null path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(LakinStatus::InvalidArgument, "path is not valid UTF-8"))
}

fn out_ptr<T>(p: *mut T) -> Result<(), LakinStatus> {
    if p.is_null() {
        Err(fail(LakinStatus::NullPointer, "null output pointer"))
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lakin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length without
/// the terminator.
#[no_mangle]
pub unsafe extern "C" fn lakin_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// One-sided amplitude spectrum `|X_k| / N` of `x`. `out` receives
/// `n / 2 + 1` values; `out_len` reports that count and is checked against
/// the capacity given in it.
#[no_mangle]
pub unsafe extern "C" fn lakin_amplitude_spectrum(
    x: *const f64,
    n: usize,
    sample_rate: f64,
    out: *mut f64,
    out_len: *mut usize,
) -> LakinStatus {
    guard(|| {
        let x = slice(x, n)?;
        out_ptr(out_len)?;
        let spec = lift(amplitude_spectrum(x, sample_rate))?;
        let one = spec.one_sided();
        let cap = *out_len;
        *out_len = one.len();
        if cap < one.len() {
            return Err(fail(
                LakinStatus::BufferTooSmall,
                format!("need {} values, buffer holds {cap}", one.len()),
            ));
        }
        out_ptr(out)?;
        for (i, (_, a)) in one.iter().enumerate() {
            *out.add(i) = *a;
        }
        Ok(())
    })
}

/// Spectrum power of `x`: mean squared amplitude over all `n` bins.
#[no_mangle]
pub unsafe extern "C" fn lakin_spectrum_power(x: *const f64, n: usize, out: *mut f64) -> LakinStatus {
    guard(|| {
        let x = slice(x, n)?;
        out_ptr(out)?;
        let spec = lift(amplitude_spectrum(x, 1.0))?;
        *out = spectrum_power(&spec);
        Ok(())
    })
}

/// Loads a recording CSV and analyses it. With `labels_path` null the
/// repetitions are detected automatically.
#[no_mangle]
pub unsafe extern "C" fn lakin_trial_analyze(
    recording_path: *const c_char,
    labels_path: *const c_char,
    sample_rate: f64,
    out: *mut *mut LakinTrial,
) -> LakinStatus {
    guard(|| {
        out_ptr(out)?;
        let rec_path = path_arg(recording_path)?;
        let labels = if labels_path.is_null() {
            None
        } else {
            Some(lift(load_labels(path_arg(labels_path)?))?)
        };
        let mut meta = TrialMeta::new("trial", "patient", Leg::Right, Updrs::from_half_steps(0).expect("on grid"));
        meta.sample_rate = sample_rate;
        let recording = lift(meta.validate().and_then(|_| load_trial(rec_path, meta)))?;
        let cfg = PipelineConfig {
            segmentation: if labels.is_some() {
                SegmentationMode::Labels
            } else {
                SegmentationMode::Auto
            },
            ..Default::default()
        };
        let a = lift(analyze_trial(&recording, labels.as_ref(), &cfg))?;
        *out = Box::into_raw(Box::new(LakinTrial(a)));
        Ok(())
    })
}

/// Number of segmented repetitions.
#[no_mangle]
pub unsafe extern "C" fn lakin_trial_rep_count(trial: *const LakinTrial) -> usize {
    trial.as_ref().map_or(0, |t| t.0.labels.len())
}

/// Writes the eleven trial features in canonical order (Theta, Omega, P, R,
/// their SDs, F, P_Xomega, P_Xtheta) into `out`.
#[no_mangle]
pub unsafe extern "C" fn lakin_trial_features(trial: *const LakinTrial, out: *mut f64, len: usize) -> LakinStatus {
    guard(|| {
        let t = trial
            .as_ref()
            .ok_or_else(|| fail(LakinStatus::NullPointer, "null trial"))?;
        if len < Feature::ALL.len() {
            return Err(fail(LakinStatus::BufferTooSmall, "feature buffer holds fewer than 11 values"));
        }
        out_ptr(out)?;
        for (i, v) in t.0.feature_vector().into_iter().enumerate() {
            *out.add(i) = v;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lakin_trial_free(trial: *mut LakinTrial) {
    if !trial.is_null() {
        drop(Box::from_raw(trial));
    }
}

/// Builds a matrix from `n_rows × n_cols` row-major values and one UPDRS
/// score per row. Columns are named `f0`, `f1`, ...
#[no_mangle]
pub unsafe extern "C" fn lakin_matrix_new(
    values: *const f64,
    n_rows: usize,
    n_cols: usize,
    labels: *const f64,
    out: *mut *mut LakinMatrix,
) -> LakinStatus {
    guard(|| {
        out_ptr(out)?;
        let total = n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| fail(LakinStatus::InvalidArgument, "matrix size overflows"))?;
        let v = slice(values, total)?;
        let l = slice(labels, n_rows)?;
        let labels = l
            .iter()
            .map(|&x| Updrs::from_f64(x))
            .collect::<lakin::Result<Vec<_>>>();
        let labels = lift(labels)?;
        let rows = (0..n_rows).map(|i| v[i * n_cols..(i + 1) * n_cols].to_vec()).collect();
        let names = (0..n_cols).map(|j| format!("f{j}")).collect();
        let m = lift(FeatureMatrix::new(names, rows, labels))?;
        *out = Box::into_raw(Box::new(LakinMatrix(m)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lakin_matrix_free(matrix: *mut LakinMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Leave-one-out evaluation over all columns of `matrix`. `k` is used by
/// kNN, `c` by the SVM; `pca_dims` of 0 disables PCA.
#[no_mangle]
pub unsafe extern "C" fn lakin_loocv(
    matrix: *const LakinMatrix,
    method: LakinMethod,
    k: usize,
    c: f64,
    pca_dims: usize,
    out: *mut *mut LakinReport,
) -> LakinStatus {
    guard(|| {
        out_ptr(out)?;
        let m = matrix
            .as_ref()
            .ok_or_else(|| fail(LakinStatus::NullPointer, "null matrix"))?;
        let method = match method {
            LakinMethod::Ncc => Method::Ncc,
            LakinMethod::Knn => Method::Knn { k },
            LakinMethod::Svm => Method::Svm { c },
        };
        let mut cfg = ClassifierConfig::new(method, m.0.names().to_vec());
        cfg.pca_dims = (pca_dims > 0).then_some(pca_dims);
        let r = lift(loocv(&m.0, &cfg))?;
        *out = Box::into_raw(Box::new(LakinReport(r)));
        Ok(())
    })
}

/// Area under the error CDF, or NaN for a null report.
#[no_mangle]
pub unsafe extern "C" fn lakin_report_auc(report: *const LakinReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.auc)
}

/// Copies the nine CDF values (errors 0, 0.5, ..., 4) into `out`.
#[no_mangle]
pub unsafe extern "C" fn lakin_report_cdf(report: *const LakinReport, out: *mut f64, len: usize) -> LakinStatus {
    guard(|| {
        let r = report
            .as_ref()
            .ok_or_else(|| fail(LakinStatus::NullPointer, "null report"))?;
        let f = &r.0.cdf.fraction;
        if len < f.len() {
            return Err(fail(LakinStatus::BufferTooSmall, "CDF buffer holds fewer than 9 values"));
        }
        out_ptr(out)?;
        ptr::copy_nonoverlapping(f.as_ptr(), out, f.len());
        Ok(())
    })
}

/// Actual and predicted score of row `row`.
#[no_mangle]
pub unsafe extern "C" fn lakin_report_prediction(
    report: *const LakinReport,
    row: usize,
    actual: *mut f64,
    predicted: *mut f64,
) -> LakinStatus {
    guard(|| {
        let r = report
            .as_ref()
            .ok_or_else(|| fail(LakinStatus::NullPointer, "null report"))?;
        let p = r
            .0
            .predictions
            .get(row)
            .ok_or_else(|| fail(LakinStatus::InvalidArgument, format!("row {row} out of range")))?;
        out_ptr(actual)?;
        out_ptr(predicted)?;
        *actual = p.actual.value();
        *predicted = p.predicted.value();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lakin_report_free(report: *mut LakinReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
