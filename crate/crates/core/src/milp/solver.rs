//! Solver backends.
//!
//! A backend takes a [`LinearModel`] and returns a [`SolveResult`]. One backend
//! instance is created per call, so distinct models can be solved from
//! different threads at the same time.

use std::ffi::CString;
use std::os::raw::c_void;

use highs_sys as hs;
use serde::{Deserialize, Serialize};

use super::model::{LinearModel, Sense, VarKind};
use super::MilpError;

/// Absolute (scaled) feasibility tolerance used to validate returned points.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolveOptions {
    /// Relative MIP gap.
    pub gap: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub seed: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { gap: 0.01, time_limit: None, seed: 0 }
    }
}

impl SolveOptions {
    pub fn exact() -> Self {
        Self { gap: 1e-9, ..Self::default() }
    }

    pub fn with_gap(gap: f64) -> Self {
        Self { gap, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// Optimal within the requested relative gap.
    Optimal,
    Infeasible,
    Unbounded,
    /// Time or iteration limit; `values` holds the incumbent if one exists.
    LimitReached,
}

/// Multipliers of a continuous solve, in the `g(x) <= 0` normal form.
///
/// For a `<=` row the multiplier belongs to `a'x - b <= 0`, for a `>=` row to
/// `b - a'x <= 0`; both are nonnegative at an optimum. Equality multipliers
/// belong to `a'x - b = 0` and are free. `reduced_costs` satisfy
/// `c + Σ_rows mult * ∂g/∂x = reduced_costs`, so a positive entry means the
/// lower bound is active and a negative one the upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LpDuals {
    pub rows: Vec<f64>,
    pub reduced_costs: Vec<f64>,
}

impl LpDuals {
    /// Dual objective reconstructed from the multipliers.
    pub fn dual_objective(&self, model: &LinearModel) -> f64 {
        let mut obj = model.objective_constant;
        for (c, &mult) in model.constraints.iter().zip(&self.rows) {
            // d obj / d rhs
            let price = match c.sense {
                Sense::Ge => mult,
                Sense::Le | Sense::Eq => -mult,
            };
            obj += price * c.rhs;
        }
        for (v, &rc) in model.variables.iter().zip(&self.reduced_costs) {
            if rc > 0.0 {
                obj += rc * v.lower;
            } else if rc < 0.0 {
                obj += rc * v.upper;
            }
        }
        obj
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Proven lower bound (equals `objective` for LPs).
    pub best_bound: f64,
    pub gap: f64,
    /// Present only for pure-LP solves that reached optimality.
    pub duals: Option<LpDuals>,
    pub max_violation: f64,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, v: super::VarId) -> f64 {
        self.values[v.0]
    }

    /// Returns `self` if optimal, otherwise an error naming `what`.
    pub fn require_optimal(self, what: &str) -> Result<Self, MilpError> {
        match self.status {
            SolveStatus::Optimal => Ok(self),
            SolveStatus::LimitReached if self.has_solution() => Ok(self),
            s => Err(MilpError::NotSolved { what: what.to_string(), status: s }),
        }
    }
}

pub trait SolverBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &LinearModel, opts: &SolveOptions) -> Result<SolveResult, MilpError>;
}

/// Looks a backend up by its configuration name (`solver.backend`).
pub fn backend_by_name(name: &str) -> Result<Box<dyn SolverBackend>, MilpError> {
    match name.to_ascii_lowercase().as_str() {
        "highs" | "" => Ok(Box::new(HighsBackend)),
        other => Err(MilpError::UnknownBackend(other.to_string())),
    }
}

/// Solves with the default backend.
pub fn solve(model: &LinearModel, opts: &SolveOptions) -> Result<SolveResult, MilpError> {
    HighsBackend.solve(model, opts)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

struct Highs(*mut c_void);

impl Highs {
    fn new() -> Self {
        // SAFETY: Highs_create has no preconditions.
        Highs(unsafe { hs::Highs_create() })
    }

    fn set_bool(&self, key: &str, value: bool) -> Result<(), MilpError> {
        let k = CString::new(key).expect("option name");
        // SAFETY: valid handle and NUL-terminated key.
        check(unsafe { hs::Highs_setBoolOptionValue(self.0, k.as_ptr(), value as hs::HighsInt) }, key)
    }

    fn set_int(&self, key: &str, value: i64) -> Result<(), MilpError> {
        let k = CString::new(key).expect("option name");
        // SAFETY: as above.
        check(unsafe { hs::Highs_setIntOptionValue(self.0, k.as_ptr(), value as hs::HighsInt) }, key)
    }

    fn set_double(&self, key: &str, value: f64) -> Result<(), MilpError> {
        let k = CString::new(key).expect("option name");
        // SAFETY: as above.
        check(unsafe { hs::Highs_setDoubleOptionValue(self.0, k.as_ptr(), value) }, key)
    }

    fn set_string(&self, key: &str, value: &str) -> Result<(), MilpError> {
        let k = CString::new(key).expect("option name");
        let v = CString::new(value).expect("option value");
        // SAFETY: as above.
        check(unsafe { hs::Highs_setStringOptionValue(self.0, k.as_ptr(), v.as_ptr()) }, key)
    }

    fn info_double(&self, key: &str) -> Option<f64> {
        let k = CString::new(key).expect("info name");
        let mut out = 0.0;
        // SAFETY: valid handle, key and output pointer.
        let st = unsafe { hs::Highs_getDoubleInfoValue(self.0, k.as_ptr(), &mut out) };
        (st != hs::kHighsStatusError).then_some(out)
    }

    fn info_int(&self, key: &str) -> Option<i64> {
        let k = CString::new(key).expect("info name");
        let mut out: hs::HighsInt = 0;
        // SAFETY: as above.
        let st = unsafe { hs::Highs_getIntInfoValue(self.0, k.as_ptr(), &mut out) };
        (st != hs::kHighsStatusError).then_some(out as i64)
    }
}

impl Drop for Highs {
    fn drop(&mut self) {
        // SAFETY: the handle came from Highs_create and is dropped once.
        unsafe { hs::Highs_destroy(self.0) }
    }
}

fn check(status: hs::HighsInt, what: &str) -> Result<(), MilpError> {
    if status == hs::kHighsStatusError {
        Err(MilpError::Backend(format!("HiGHS rejected {what}")))
    } else {
        Ok(())
    }
}

/// Column-wise sparse matrix in the layout HiGHS expects.
struct Csc {
    start: Vec<hs::HighsInt>,
    index: Vec<hs::HighsInt>,
    value: Vec<f64>,
}

fn to_csc(model: &LinearModel) -> Csc {
    let n = model.num_vars();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, c) in model.constraints.iter().enumerate() {
        for &(v, a) in &c.terms {
            if a != 0.0 {
                cols[v.0].push((r, a));
            }
        }
    }
    let mut csc = Csc { start: Vec::with_capacity(n + 1), index: Vec::new(), value: Vec::new() };
    for col in cols {
        csc.start.push(csc.index.len() as hs::HighsInt);
        for (r, a) in col {
            csc.index.push(r as hs::HighsInt);
            csc.value.push(a);
        }
    }
    csc.start.push(csc.index.len() as hs::HighsInt);
    csc
}

impl HighsBackend {
    fn run(&self, model: &LinearModel, opts: &SolveOptions, presolve: bool) -> Result<(Highs, hs::HighsInt), MilpError> {
        let h = Highs::new();
        h.set_bool("output_flag", false)?;
        h.set_int("random_seed", opts.seed as i64)?;
        h.set_double("mip_rel_gap", opts.gap.max(0.0))?;
        h.set_double("mip_feasibility_tolerance", 1e-9)?;
        h.set_double("primal_feasibility_tolerance", 1e-9)?;
        h.set_double("dual_feasibility_tolerance", 1e-9)?;
        if let Some(t) = opts.time_limit {
            h.set_double("time_limit", t)?;
        }
        if !presolve {
            h.set_string("presolve", "off")?;
        }

        let n = model.num_vars();
        let m = model.num_constraints();
        let mut cost = vec![0.0; n];
        for &(v, a) in &model.objective {
            cost[v.0] += a;
        }
        let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
        let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
        let (row_lo, row_up): (Vec<f64>, Vec<f64>) = model
            .constraints
            .iter()
            .map(|c| match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            })
            .unzip();
        let integrality: Vec<hs::HighsInt> = model
            .variables
            .iter()
            .map(|v| match v.kind {
                VarKind::Continuous => hs::kHighsVarTypeContinuous,
                VarKind::Binary | VarKind::Integer => hs::kHighsVarTypeInteger,
            })
            .collect();
        let a = to_csc(model);
        let is_mip = model.is_mip();
        // SAFETY: all arrays have the lengths HiGHS documents for these counts
        // and stay alive for the duration of the call.
        let st = unsafe {
            hs::Highs_passMip(
                h.0,
                n as hs::HighsInt,
                m as hs::HighsInt,
                a.index.len() as hs::HighsInt,
                hs::kHighsMatrixFormatColwise,
                hs::kHighsObjSenseMinimize,
                model.objective_constant,
                cost.as_ptr(),
                lower.as_ptr(),
                upper.as_ptr(),
                row_lo.as_ptr(),
                row_up.as_ptr(),
                a.start.as_ptr(),
                a.index.as_ptr(),
                a.value.as_ptr(),
                if is_mip { integrality.as_ptr() } else { std::ptr::null() },
            )
        };
        check(st, "model")?;
        // SAFETY: valid handle with a model loaded.
        let st = unsafe { hs::Highs_run(h.0) };
        check(st, "run")?;
        // SAFETY: as above.
        let ms = unsafe { hs::Highs_getModelStatus(h.0) };
        Ok((h, ms))
    }
}

impl SolverBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &LinearModel, opts: &SolveOptions) -> Result<SolveResult, MilpError> {
        model.validate()?;
        if model.num_vars() == 0 {
            return Ok(solve_empty(model));
        }
        let (mut h, mut ms) = self.run(model, opts, true)?;
        // presolve can misjudge Big-M rows; an infeasible MIP is confirmed
        // without it
        let recheck = ms == hs::kHighsModelStatusUnboundedOrInfeasible
            || (ms == hs::kHighsModelStatusInfeasible && model.is_mip());
        if recheck {
            (h, ms) = self.run(model, opts, false)?;
        }
        let status = match ms {
            hs::kHighsModelStatusOptimal => SolveStatus::Optimal,
            hs::kHighsModelStatusInfeasible => SolveStatus::Infeasible,
            hs::kHighsModelStatusUnbounded | hs::kHighsModelStatusUnboundedOrInfeasible => SolveStatus::Unbounded,
            hs::kHighsModelStatusTimeLimit
            | hs::kHighsModelStatusIterationLimit
            | hs::kHighsModelStatusSolutionLimit
            | hs::kHighsModelStatusInterrupt
            | hs::kHighsModelStatusObjectiveBound
            | hs::kHighsModelStatusObjectiveTarget
            | hs::kHighsModelStatusUnknown => SolveStatus::LimitReached,
            other => return Err(MilpError::Backend(format!("HiGHS model status {other}"))),
        };

        let is_mip = model.is_mip();
        let n = model.num_vars();
        let m = model.num_constraints();
        let has_primal = h.info_int("primal_solution_status").unwrap_or(0) == 2;
        let mut result = SolveResult {
            status,
            values: Vec::new(),
            objective: f64::NAN,
            best_bound: f64::NAN,
            gap: f64::NAN,
            duals: None,
            max_violation: 0.0,
        };
        if !has_primal || matches!(status, SolveStatus::Infeasible | SolveStatus::Unbounded) {
            return Ok(result);
        }

        let mut col_value = vec![0.0; n];
        let mut col_dual = vec![0.0; n];
        let mut row_value = vec![0.0; m];
        let mut row_dual = vec![0.0; m];
        // SAFETY: output buffers sized to the model's column and row counts.
        let st = unsafe {
            hs::Highs_getSolution(
                h.0,
                col_value.as_mut_ptr(),
                col_dual.as_mut_ptr(),
                row_value.as_mut_ptr(),
                row_dual.as_mut_ptr(),
            )
        };
        check(st, "solution query")?;
        // SAFETY: valid handle.
        let objective = unsafe { hs::Highs_getObjectiveValue(h.0) };
        result.objective = objective;
        if is_mip {
            result.best_bound = h.info_double("mip_dual_bound").unwrap_or(f64::NEG_INFINITY);
            result.gap = h.info_double("mip_gap").unwrap_or(f64::NAN);
            if status == SolveStatus::Optimal && !(result.best_bound.is_finite()) {
                result.best_bound = objective;
            }
        } else {
            result.best_bound = objective;
            result.gap = 0.0;
            let dual_ok = h.info_int("dual_solution_status").unwrap_or(0) == 2;
            if status == SolveStatus::Optimal && dual_ok {
                let rows = model
                    .constraints
                    .iter()
                    .zip(&row_dual)
                    .map(|(c, &pi)| match c.sense {
                        Sense::Ge => pi,
                        Sense::Le | Sense::Eq => -pi,
                    })
                    .map(|x| if x == 0.0 { 0.0 } else { x })
                    .collect();
                result.duals = Some(LpDuals { rows, reduced_costs: col_dual });
            }
        }
        let (viol, at) = model.max_violation(&col_value);
        if viol > FEASIBILITY_TOL {
            log::warn!("solution violates {} by {viol:.3e} (scaled)", at.unwrap_or_default());
        }
        result.max_violation = viol;
        result.values = col_value;
        Ok(result)
    }
}

fn solve_empty(model: &LinearModel) -> SolveResult {
    let feasible = model.constraints.iter().all(|c| c.violation(&[]) <= FEASIBILITY_TOL);
    SolveResult {
        status: if feasible { SolveStatus::Optimal } else { SolveStatus::Infeasible },
        values: Vec::new(),
        objective: model.objective_constant,
        best_bound: model.objective_constant,
        gap: 0.0,
        duals: feasible.then(|| LpDuals { rows: vec![0.0; model.num_constraints()], reduced_costs: Vec::new() }),
        max_violation: 0.0,
    }
}
