//! C ABI over `advsurv`.
//!
//! Every function returns an [`AdvsurvStatus`]; results go through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`advsurv_last_error`]. Objects are opaque handles released with their
//! `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use advsurv::costing::{project_cost_energy, trash_score, Verdict};
use advsurv::io::{load_model, load_trials, save_model};
use advsurv::survival::{build_survival_dataset, fit_aft, AftModel, Family, FitOptions, TrialSchema};
use advsurv::{Error, HardwareProfile, TrialRecord};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvsurvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Data = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvsurvFamily {
    Weibull = 0,
    LogLogistic = 1,
    LogNormal = 2,
}

impl From<AdvsurvFamily> for Family {
    fn from(f: AdvsurvFamily) -> Self {
        match f {
            AdvsurvFamily::Weibull => Family::Weibull,
            AdvsurvFamily::LogLogistic => Family::LogLogistic,
            AdvsurvFamily::LogNormal => Family::LogNormal,
        }
    }
}

/// A loaded trial log.
pub struct AdvsurvTrials {
    records: Vec<TrialRecord>,
}

/// A fitted accelerated failure time model.
pub struct AdvsurvModel {
    model: AftModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(AdvsurvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) => AdvsurvStatus::InvalidArgument,
            Error::Io { .. } => AdvsurvStatus::Io,
            Error::Data(_) | Error::Parse { .. } | Error::MissingColumns(_) | Error::Json(_) | Error::Csv(_) => {
                AdvsurvStatus::Data
            }
            Error::Divergence { .. } | Error::NonFinite { .. } | Error::NonConvergence { .. } | Error::Numerical(_) => {
                AdvsurvStatus::Numerical
            }
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AdvsurvStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AdvsurvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AdvsurvStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {message}"));
            AdvsurvStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Failure(AdvsurvStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn slice_arg<'a>(x: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if x.is_null() {
        return Err(null("covariate array"));
    }
    Ok(std::slice::from_raw_parts(x, len))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

unsafe fn model_arg<'a>(m: *const AdvsurvModel) -> Result<&'a AftModel, Failure> {
    m.as_ref().map(|m| &m.model).ok_or_else(|| null("model"))
}

unsafe fn trials_arg<'a>(t: *const AdvsurvTrials) -> Result<&'a [TrialRecord], Failure> {
    t.as_ref().map(|t| t.records.as_slice()).ok_or_else(|| null("trials"))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn advsurv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Load a JSONL trial log.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn advsurv_trials_load(path: *const c_char, out: *mut *mut AdvsurvTrials) -> AdvsurvStatus {
    guard(|| {
        let out = out_arg(out)?;
        let records = load_trials(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(AdvsurvTrials { records }));
        Ok(())
    })
}

/// Number of records, including failed trials.
///
/// # Safety
/// `trials` must come from [`advsurv_trials_load`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_trials_len(trials: *const AdvsurvTrials, out: *mut usize) -> AdvsurvStatus {
    guard(|| {
        *out_arg(out)? = trials_arg(trials)?.len();
        Ok(())
    })
}

/// Per-sample training time of record `index`.
///
/// # Safety
/// `trials` must come from [`advsurv_trials_load`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_trials_train_time_per_sample(
    trials: *const AdvsurvTrials,
    index: usize,
    out: *mut f64,
) -> AdvsurvStatus {
    guard(|| {
        let out = out_arg(out)?;
        let records = trials_arg(trials)?;
        let rec = records.get(index).ok_or_else(|| {
            Failure(AdvsurvStatus::InvalidArgument, format!("index {index} out of range ({} trials)", records.len()))
        })?;
        *out = rec.train_time_per_sample();
        Ok(())
    })
}

/// Raw covariate row of record `index` in the column order of `model`.
/// `out` must hold [`advsurv_model_n_covariates`] values.
///
/// # Safety
/// Handles must be live; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn advsurv_trials_covariates(
    trials: *const AdvsurvTrials,
    model: *const AdvsurvModel,
    index: usize,
    out: *mut f64,
    len: usize,
) -> AdvsurvStatus {
    guard(|| {
        let records = trials_arg(trials)?;
        let model = model_arg(model)?;
        let rec = records.get(index).ok_or_else(|| {
            Failure(AdvsurvStatus::InvalidArgument, format!("index {index} out of range ({} trials)", records.len()))
        })?;
        if len != model.schema.len() {
            return Err(Failure(
                AdvsurvStatus::InvalidArgument,
                format!("buffer holds {len} values, model has {} covariates", model.schema.len()),
            ));
        }
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let row = TrialSchema::from_names(&model.schema)?.row(rec);
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&row);
        Ok(())
    })
}

/// # Safety
/// `trials` must come from [`advsurv_trials_load`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn advsurv_trials_free(trials: *mut AdvsurvTrials) {
    if !trials.is_null() {
        drop(Box::from_raw(trials));
    }
}

/// Fit an AFT model to the successful trials with default options.
///
/// # Safety
/// `trials` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_aft_fit(
    trials: *const AdvsurvTrials,
    family: AdvsurvFamily,
    out: *mut *mut AdvsurvModel,
) -> AdvsurvStatus {
    guard(|| {
        let out = out_arg(out)?;
        let data = build_survival_dataset(trials_arg(trials)?)?;
        let model = fit_aft(&data, family.into(), &FitOptions::default())?;
        *out = Box::into_raw(Box::new(AdvsurvModel { model }));
        Ok(())
    })
}

/// Load a model JSON file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_model_load(path: *const c_char, out: *mut *mut AdvsurvModel) -> AdvsurvStatus {
    guard(|| {
        let out = out_arg(out)?;
        let model = load_model(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(AdvsurvModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be live and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn advsurv_model_save(model: *const AdvsurvModel, path: *const c_char) -> AdvsurvStatus {
    guard(|| {
        save_model(model_arg(model)?, path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn advsurv_model_free(model: *mut AdvsurvModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_model_n_covariates(model: *const AdvsurvModel, out: *mut usize) -> AdvsurvStatus {
    guard(|| {
        *out_arg(out)? = model_arg(model)?.schema.len();
        Ok(())
    })
}

/// `S(t | x)` for a raw covariate row `x` of length `n_x`.
///
/// # Safety
/// `model` must be live, `x` must point to `n_x` doubles, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_model_survival(
    model: *const AdvsurvModel,
    x: *const f64,
    n_x: usize,
    t: f64,
    out: *mut f64,
) -> AdvsurvStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = model_arg(model)?.survival_function(slice_arg(x, n_x)?, t)?;
        Ok(())
    })
}

/// `E[T | x]` integrated up to `t_star`; pass a value `<= 0` for the longest
/// time seen in fitting.
///
/// # Safety
/// `model` must be live, `x` must point to `n_x` doubles, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_model_expected_survival_time(
    model: *const AdvsurvModel,
    x: *const f64,
    n_x: usize,
    t_star: f64,
    out: *mut f64,
) -> AdvsurvStatus {
    guard(|| {
        let out = out_arg(out)?;
        let t_star = (t_star > 0.0).then_some(t_star);
        *out = model_arg(model)?.expected_survival_time(slice_arg(x, n_x)?, t_star)?;
        Ok(())
    })
}

/// `exp(theta . z)` for a raw covariate row.
///
/// # Safety
/// `model` must be live, `x` must point to `n_x` doubles, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_model_acceleration_factor(
    model: *const AdvsurvModel,
    x: *const f64,
    n_x: usize,
    out: *mut f64,
) -> AdvsurvStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = model_arg(model)?.acceleration_factor(slice_arg(x, n_x)?)?;
        Ok(())
    })
}

/// TRASH score `t_train_per_sample / E[T]`; `broken` is set when it exceeds 1.
///
/// # Safety
/// `score` and `broken` must be valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_trash_score(
    t_train_per_sample: f64,
    expected_survival_time: f64,
    score: *mut f64,
    broken: *mut bool,
) -> AdvsurvStatus {
    guard(|| {
        let (score, broken) = (out_arg(score)?, out_arg(broken)?);
        let s = trash_score(t_train_per_sample, expected_survival_time)?;
        *score = s.score;
        *broken = s.verdict == Verdict::Broken;
        Ok(())
    })
}

/// Rental cost in USD and energy in joules for `seconds` of compute.
///
/// # Safety
/// `cost_usd` and `energy_joules` must be valid.
#[no_mangle]
pub unsafe extern "C" fn advsurv_project_cost_energy(
    seconds: f64,
    cost_per_hour: f64,
    power_watts: f64,
    cost_usd: *mut f64,
    energy_joules: *mut f64,
) -> AdvsurvStatus {
    guard(|| {
        let (cost_usd, energy_joules) = (out_arg(cost_usd)?, out_arg(energy_joules)?);
        let profile = HardwareProfile::new("ffi", cost_per_hour, power_watts, 1.0);
        let p = project_cost_energy(seconds, &profile)?;
        *cost_usd = p.cost_usd;
        *energy_joules = p.energy_joules;
        Ok(())
    })
}
