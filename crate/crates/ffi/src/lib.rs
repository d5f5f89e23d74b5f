//! C ABI for specpath.
//!
//! Models are opaque `SpModel` handles owned by the caller and released with
//! `sp_model_free`. Every fallible call returns an `SpStatus`; on failure the
//! message is available from `sp_last_error` on the same thread. Matrices are
//! dense, row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use specpath::interpret::{importance, render_expression, sensitivity};
use specpath::{fit, fit_dataset, load_csv, load_model, save_model, Error, FitConfig, Matrix, SpectralModel};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    SpOk = 0,
    /// Null pointer or inconsistent sizes passed by the caller.
    SpErrArgument = 1,
    SpErrConfig = 2,
    SpErrData = 3,
    SpErrNumerical = 4,
    SpErrState = 5,
    /// Model file is malformed or of an unsupported version.
    SpErrSchema = 6,
    SpErrIo = 7,
    /// Output buffer too small; the required size has been written.
    SpErrBuffer = 8,
    SpErrPanic = 9,
}

/// Opaque fitted model.
pub struct SpModel {
    inner: SpectralModel,
}

/// Fit settings. Null array pointers (or zero lengths) select the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpFitConfig {
    pub sparsity_set: *const usize,
    pub sparsity_len: usize,
    pub max_paths: usize,
    pub block_size: usize,
    pub block_size_min: usize,
    pub block_size_max: usize,
    pub lambda_grid: *const f64,
    pub lambda_len: usize,
    pub patience: usize,
    pub min_improvement: f64,
    pub final_resweep: bool,
    pub seed: u64,
}

/// Scores of a fit made by `sp_fit_csv`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SpFitScores {
    pub train_r2: f64,
    pub val_r2: f64,
    pub test_r2: f64,
    pub test_nrmse: f64,
    pub seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> SpStatus {
    match err {
        Error::Config(_) => SpStatus::SpErrConfig,
        Error::Numerical(_) => SpStatus::SpErrNumerical,
        Error::State(_) => SpStatus::SpErrState,
        Error::Schema(_) | Error::Version { .. } => SpStatus::SpErrSchema,
        Error::Io { .. } => SpStatus::SpErrIo,
        Error::Data(_) | Error::InvalidPath(_) | Error::InvalidCandidate(_) | Error::UndefinedMetric(_) => {
            SpStatus::SpErrData
        }
    }
}

struct Fail(SpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn arg(msg: &str) -> Fail {
    Fail(SpStatus::SpErrArgument, msg.to_owned())
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SpStatus::SpOk
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            SpStatus::SpErrPanic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(arg(&format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(arg(&format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn matrix(p: *const f64, rows: usize, cols: usize, what: &str) -> Result<Matrix, Fail> {
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| arg(&format!("{what}: {rows} x {cols} overflows")))?;
    Ok(Matrix::from_vec(rows, cols, slice(p, len, what)?.to_vec())?)
}

unsafe fn string(p: *const c_char, what: &str) -> Result<String, Fail> {
    if p.is_null() {
        return Err(arg(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| arg(&format!("{what} is not valid UTF-8")))
}

unsafe fn model<'a>(m: *const SpModel) -> Result<&'a SpectralModel, Fail> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| arg("model is null"))
}

unsafe fn fit_config(c: *const SpFitConfig) -> Result<FitConfig, Fail> {
    let Some(c) = c.as_ref() else {
        return Ok(FitConfig::default());
    };
    let defaults = FitConfig::default();
    let sparsity_set = match slice(c.sparsity_set, c.sparsity_len, "sparsity_set")? {
        [] => defaults.sparsity_set,
        s => s.to_vec(),
    };
    let lambda_grid = match slice(c.lambda_grid, c.lambda_len, "lambda_grid")? {
        [] => defaults.lambda_grid,
        s => s.to_vec(),
    };
    Ok(FitConfig {
        sparsity_set,
        max_paths: c.max_paths,
        block_size: c.block_size,
        block_size_bounds: (c.block_size_min, c.block_size_max),
        lambda_grid,
        patience: c.patience,
        min_improvement: c.min_improvement,
        final_resweep: c.final_resweep,
        seed: c.seed,
    })
}

unsafe fn emit(out: *mut *mut SpModel, inner: SpectralModel) -> Result<(), Fail> {
    if out.is_null() {
        return Err(arg("output handle pointer is null"));
    }
    *out = Box::into_raw(Box::new(SpModel { inner }));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next specpath call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default fit settings. Array fields are null, meaning the built-in grids.
#[no_mangle]
pub extern "C" fn sp_fit_config_default() -> SpFitConfig {
    let d = FitConfig::default();
    SpFitConfig {
        sparsity_set: ptr::null(),
        sparsity_len: 0,
        max_paths: d.max_paths,
        block_size: d.block_size,
        block_size_min: d.block_size_bounds.0,
        block_size_max: d.block_size_bounds.1,
        lambda_grid: ptr::null(),
        lambda_len: 0,
        patience: d.patience,
        min_improvement: d.min_improvement,
        final_resweep: d.final_resweep,
        seed: d.seed,
    }
}

/// Fits on caller-provided training and validation matrices with `dim`
/// columns. `config` may be null for defaults.
///
/// # Safety
/// Array pointers must be valid for the stated sizes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_fit(
    x_train: *const f64,
    y_train: *const f64,
    n_train: usize,
    x_val: *const f64,
    y_val: *const f64,
    n_val: usize,
    dim: usize,
    config: *const SpFitConfig,
    out: *mut *mut SpModel,
) -> SpStatus {
    guard(|| {
        let xt = matrix(x_train, n_train, dim, "x_train")?;
        let yt = slice(y_train, n_train, "y_train")?;
        let xv = matrix(x_val, n_val, dim, "x_val")?;
        let yv = slice(y_val, n_val, "y_val")?;
        let m = fit(&xt, yt, &xv, yv, &fit_config(config)?)?;
        emit(out, m)
    })
}

/// Loads a CSV, splits it with the configured seed and fits, exactly like
/// the `fit` command. `scores` may be null.
///
/// # Safety
/// `path` and `target` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_fit_csv(
    path: *const c_char,
    target: *const c_char,
    config: *const SpFitConfig,
    out: *mut *mut SpModel,
    scores: *mut SpFitScores,
) -> SpStatus {
    guard(|| {
        let ds = load_csv(PathBuf::from(string(path, "path")?), Some(&string(target, "target")?))?;
        let o = fit_dataset(&ds, &fit_config(config)?)?;
        if let Some(s) = scores.as_mut() {
            *s = SpFitScores {
                train_r2: o.train.r2,
                val_r2: o.val.r2,
                test_r2: o.test.r2,
                test_nrmse: o.test.nrmse,
                seconds: o.seconds,
            };
        }
        emit(out, o.model)
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_model_load(path: *const c_char, out: *mut *mut SpModel) -> SpStatus {
    guard(|| {
        let m = load_model(PathBuf::from(string(path, "path")?))?;
        emit(out, m)
    })
}

/// # Safety
/// `model` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sp_model_save(model: *const SpModel, path: *const c_char) -> SpStatus {
    guard(|| Ok(save_model(self::model(model)?, PathBuf::from(string(path, "path")?))?))
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sp_model_free(model: *mut SpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of input features, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn sp_model_dim(model: *const SpModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// Number of selected paths, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn sp_model_num_paths(model: *const SpModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.num_paths())
}

/// Penalty chosen during fitting, or NaN for a null handle.
///
/// # Safety
/// `model` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn sp_model_lambda(model: *const SpModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.inner.lambda_star)
}

/// Writes `n` predictions for the `n x dim` matrix `x` into `out`.
///
/// # Safety
/// `x` must hold `n * dim` values and `out` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn sp_model_predict(
    model: *const SpModel,
    x: *const f64,
    n: usize,
    dim: usize,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        let pred = self::model(model)?.predict_raw(&matrix(x, n, dim, "x")?)?;
        slice_mut(out, n, "out")?.copy_from_slice(&pred);
        Ok(())
    })
}

/// Writes the `n x dim` analytic gradient of the prediction, row-major.
///
/// # Safety
/// `x` must hold `n * dim` values and `out` room for as many.
#[no_mangle]
pub unsafe extern "C" fn sp_model_sensitivity(
    model: *const SpModel,
    x: *const f64,
    n: usize,
    dim: usize,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        let g = sensitivity(self::model(model)?, &matrix(x, n, dim, "x")?)?;
        slice_mut(out, n * dim, "out")?.copy_from_slice(g.as_slice());
        Ok(())
    })
}

/// Writes `dim` normalized importances (summing to 1) over the samples `x`.
/// `degenerate` (nullable) is set when the model ignores every input.
///
/// # Safety
/// `x` must hold `n * dim` values and `out` room for `dim`.
#[no_mangle]
pub unsafe extern "C" fn sp_model_importance(
    model: *const SpModel,
    x: *const f64,
    n: usize,
    dim: usize,
    out: *mut f64,
    degenerate: *mut bool,
) -> SpStatus {
    guard(|| {
        let r = importance(self::model(model)?, &matrix(x, n, dim, "x")?)?;
        slice_mut(out, dim, "out")?.copy_from_slice(&r.importance);
        if let Some(d) = degenerate.as_mut() {
            *d = r.degenerate;
        }
        Ok(())
    })
}

/// Renders the top `top_n` terms as UTF-8 text into `buf`. `needed` (nullable)
/// receives the size including the NUL; a short buffer yields `SP_ERR_BUFFER`.
///
/// # Safety
/// `buf` must have room for `buf_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sp_model_expression(
    model: *const SpModel,
    top_n: usize,
    buf: *mut c_char,
    buf_len: usize,
    needed: *mut usize,
) -> SpStatus {
    guard(|| {
        let text = render_expression(self::model(model)?, top_n, None);
        let size = text.len() + 1;
        if let Some(n) = needed.as_mut() {
            *n = size;
        }
        if buf_len < size {
            return Err(Fail(
                SpStatus::SpErrBuffer,
                format!("expression needs {size} bytes, buffer has {buf_len}"),
            ));
        }
        let dst = slice_mut(buf.cast::<u8>(), size, "buf")?;
        dst[..text.len()].copy_from_slice(text.as_bytes());
        dst[text.len()] = 0;
        Ok(())
    })
}
