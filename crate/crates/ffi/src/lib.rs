//! C interface to the copo library.
//!
//! Every function returns a [`CopoStatus`]; on failure the message is
//! available from [`copo_last_error`] on the same thread. Handles are
//! opaque, created by `*_load`, `copo_predictor_identity` or `copo_train`
//! and released by the matching `*_free`. Passing a freed handle is
//! undefined behavior.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use copo::data::{load_scenarios, load_system, OperationScenario, PowerSystem};
use copo::erm::{train, TrainingConfig, TrainingStatus};
use copo::eval::{metric_ei, run_open_loop_record, run_prescriptive_uc, EvaluationRecord};
use copo::milp::SolveOptions;
use copo::ops::Penalties;
use copo::predictors::{AffinePredictorPair, PredictorStructure, ReserveMapping};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Data = 4,
    Solver = 5,
    Training = 6,
    Panic = 7,
}

/// A power system.
pub struct CopoSystem(PowerSystem);
/// The scenario days of one file.
pub struct CopoScenarios(Vec<OperationScenario>);
/// An affine predictor pair.
pub struct CopoPredictor(AffinePredictorPair);

/// Actual cost of one day and its breakdown, dollars.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CopoCost {
    pub startup: f64,
    pub noload: f64,
    pub ed_startup: f64,
    pub ed_noload: f64,
    pub generation: f64,
    pub slack: f64,
    pub total: f64,
}

impl From<&EvaluationRecord> for CopoCost {
    fn from(r: &EvaluationRecord) -> Self {
        let b = r.breakdown;
        CopoCost {
            startup: b.startup,
            noload: b.noload,
            ed_startup: b.ed_startup,
            ed_noload: b.ed_noload,
            generation: b.generation,
            slack: b.slack,
            total: r.actual_cost,
        }
    }
}

/// Training settings; start from [`copo_train_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopoTrainOptions {
    pub alpha: f64,
    pub lambda_w: f64,
    pub lambda_r: f64,
    /// Relative gap for the solver and the stopping rule.
    pub gap: f64,
    pub max_iterations: u32,
    /// Upper bound on every multiplier; nonpositive means none.
    pub multiplier_cap: f64,
}

/// Outcome of a training run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CopoTrainReport {
    pub iterations: u32,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// 1 when the gap target was met.
    pub converged: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (CopoStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CopoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CopoStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CopoStatus::Panic
        }
    }
}

fn fail<E: std::fmt::Display>(status: CopoStatus) -> impl Fn(E) -> Failure {
    move |e| (status, e.to_string())
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((CopoStatus::NullPointer, "null path".into()));
    }
    CStr::from_ptr(p).to_str().map_err(fail(CopoStatus::InvalidArgument))
}

unsafe fn href<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| (CopoStatus::NullPointer, format!("null {what}")))
}

unsafe fn out<T>(p: *mut T, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err((CopoStatus::NullPointer, "null output pointer".into()));
    }
    p.write(value);
    Ok(())
}

fn day<'a>(sc: &'a CopoScenarios, index: usize) -> Result<&'a OperationScenario, Failure> {
    sc.0.get(index).ok_or_else(|| (CopoStatus::InvalidArgument, format!("day {index} out of range ({} days)", sc.0.len())))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn copo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `file` must be a NUL-terminated string; `system` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn copo_system_load(file: *const c_char, system: *mut *mut CopoSystem) -> CopoStatus {
    guard(|| {
        let s = load_system(path(file)?).map_err(fail(CopoStatus::Data))?;
        out(system, Box::into_raw(Box::new(CopoSystem(s))))
    })
}

/// # Safety
/// `system` must come from [`copo_system_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn copo_system_free(system: *mut CopoSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Horizon, thermal units and RES units of `system`.
///
/// # Safety
/// `system` must be a live handle; the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn copo_system_dims(system: *const CopoSystem, hours: *mut usize, units: *mut usize, res: *mut usize) -> CopoStatus {
    guard(|| {
        let s = &href(system, "system")?.0;
        out(hours, s.horizon())?;
        out(units, s.num_units())?;
        out(res, s.num_res())
    })
}

/// Reads scenario days; reserve columns absent from the file are sized with
/// fraction `alpha` of the load forecast.
///
/// # Safety
/// `system` must be a live handle, `file` NUL-terminated, `scenarios` writable.
#[no_mangle]
pub unsafe extern "C" fn copo_scenarios_load(
    system: *const CopoSystem,
    file: *const c_char,
    alpha: f64,
    scenarios: *mut *mut CopoScenarios,
) -> CopoStatus {
    guard(|| {
        let s = &href(system, "system")?.0;
        let days = load_scenarios(path(file)?, s, alpha).map_err(fail(CopoStatus::Data))?;
        out(scenarios, Box::into_raw(Box::new(CopoScenarios(days))))
    })
}

/// # Safety
/// `scenarios` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn copo_scenarios_len(scenarios: *const CopoScenarios) -> usize {
    scenarios.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `scenarios` must come from [`copo_scenarios_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn copo_scenarios_free(scenarios: *mut CopoScenarios) {
    if !scenarios.is_null() {
        drop(Box::from_raw(scenarios));
    }
}

/// Predictors reproducing the raw predictions and the rule-of-thumb reserve.
///
/// # Safety
/// `system` must be a live handle; `predictor` writable.
#[no_mangle]
pub unsafe extern "C" fn copo_predictor_identity(system: *const CopoSystem, alpha: f64, predictor: *mut *mut CopoPredictor) -> CopoStatus {
    guard(|| {
        let s = &href(system, "system")?.0;
        if !(0.0..=1.0).contains(&alpha) {
            return Err((CopoStatus::InvalidArgument, format!("alpha {alpha} outside [0, 1]")));
        }
        let p = AffinePredictorPair::identity(s.horizon(), s.num_res(), alpha, ReserveMapping::Split);
        out(predictor, Box::into_raw(Box::new(CopoPredictor(p))))
    })
}

/// # Safety
/// `file` must be NUL-terminated; `predictor` writable.
#[no_mangle]
pub unsafe extern "C" fn copo_predictor_load(file: *const c_char, predictor: *mut *mut CopoPredictor) -> CopoStatus {
    guard(|| {
        let p = AffinePredictorPair::load(path(file)?).map_err(fail(CopoStatus::Io))?;
        out(predictor, Box::into_raw(Box::new(CopoPredictor(p))))
    })
}

/// # Safety
/// `predictor` must be a live handle; `file` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn copo_predictor_save(predictor: *const CopoPredictor, file: *const c_char) -> CopoStatus {
    guard(|| {
        let p = &href(predictor, "predictor")?.0;
        p.save(path(file)?).map_err(fail(CopoStatus::Io))
    })
}

/// RES multiplier of hour `t` and unit `j`, both zero-based.
///
/// # Safety
/// `predictor` must be a live handle; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn copo_predictor_res_multiplier(predictor: *const CopoPredictor, t: usize, j: usize, value: *mut f64) -> CopoStatus {
    guard(|| {
        let p = &href(predictor, "predictor")?.0;
        let m = p.m.get(t).and_then(|r| r.get(j)).ok_or_else(|| (CopoStatus::InvalidArgument, format!("no multiplier at ({t}, {j})")))?;
        out(value, *m)
    })
}

/// # Safety
/// `predictor` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn copo_predictor_free(predictor: *mut CopoPredictor) {
    if !predictor.is_null() {
        drop(Box::from_raw(predictor));
    }
}

#[no_mangle]
pub extern "C" fn copo_train_options_default() -> CopoTrainOptions {
    let c = TrainingConfig::new(vec![]);
    CopoTrainOptions {
        alpha: c.structure.alpha,
        lambda_w: c.lambda_w,
        lambda_r: c.lambda_r,
        gap: c.gap_target,
        max_iterations: c.max_iterations as u32,
        multiplier_cap: 0.0,
    }
}

/// Trains predictors on every day of `scenarios`.
///
/// # Safety
/// Handles must be live; `options` readable; `predictor` writable; `report`
/// writable or null.
#[no_mangle]
pub unsafe extern "C" fn copo_train(
    system: *const CopoSystem,
    scenarios: *const CopoScenarios,
    options: *const CopoTrainOptions,
    predictor: *mut *mut CopoPredictor,
    report: *mut CopoTrainReport,
) -> CopoStatus {
    guard(|| {
        let s = &href(system, "system")?.0;
        let days = &href(scenarios, "scenarios")?.0;
        let o = href(options, "options")?;
        let mut c = TrainingConfig::new(days.clone());
        c.structure = PredictorStructure {
            alpha: o.alpha,
            multiplier_cap: (o.multiplier_cap > 0.0).then_some(o.multiplier_cap),
            ..Default::default()
        };
        c.lambda_w = o.lambda_w;
        c.lambda_r = o.lambda_r;
        c.gap_target = o.gap;
        c.solver = SolveOptions::with_gap(o.gap);
        c.max_iterations = o.max_iterations as usize;
        let (pair, state) = train(s, &c).map_err(fail(CopoStatus::Training))?;
        if !report.is_null() {
            report.write(CopoTrainReport {
                iterations: state.iteration as u32,
                lower_bound: state.lb,
                upper_bound: state.ub,
                converged: (state.status == TrainingStatus::Converged) as i32,
            });
        }
        out(predictor, Box::into_raw(Box::new(CopoPredictor(pair))))
    })
}

/// Commits on the raw predictions of day `index` and dispatches on its
/// realization.
///
/// # Safety
/// Handles must be live; `cost` writable.
#[no_mangle]
pub unsafe extern "C" fn copo_run_open_loop(
    system: *const CopoSystem,
    scenarios: *const CopoScenarios,
    index: usize,
    cost: *mut CopoCost,
) -> CopoStatus {
    guard(|| {
        let s = &href(system, "system")?.0;
        let d = day(href(scenarios, "scenarios")?, index)?;
        let r = run_open_loop_record(s, d, &Penalties::default(), &SolveOptions::default()).map_err(fail(CopoStatus::Solver))?;
        out(cost, CopoCost::from(&r))
    })
}

/// As [`copo_run_open_loop`] on the predictions of `predictor`.
///
/// # Safety
/// Handles must be live; `cost` writable.
#[no_mangle]
pub unsafe extern "C" fn copo_run_predictor(
    system: *const CopoSystem,
    predictor: *const CopoPredictor,
    scenarios: *const CopoScenarios,
    index: usize,
    cost: *mut CopoCost,
) -> CopoStatus {
    guard(|| {
        let s = &href(system, "system")?.0;
        let p = &href(predictor, "predictor")?.0;
        let d = day(href(scenarios, "scenarios")?, index)?;
        let r = run_prescriptive_uc(s, p, d, &Penalties::default(), &SolveOptions::default()).map_err(fail(CopoStatus::Solver))?;
        out(cost, CopoCost::from(&r))
    })
}

/// Economic improvement of `c_cpo` over `c_opo`, percent.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copo_metric_ei(c_opo: f64, c_cpo: f64, value: *mut f64) -> CopoStatus {
    guard(|| out(value, metric_ei(c_opo, c_cpo).map_err(fail(CopoStatus::InvalidArgument))?))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn copo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
