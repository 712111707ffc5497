use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::{Matrix, OperationScenario, PowerSystem, ReserveRequirement};
use crate::milp::SolveOptions;
use crate::ops::{run_with_predictions, solve_ed, CostReport, OperationResult, Penalties};
use crate::predictors::AffinePredictorPair;

use super::tsp::{solve_tsp, UncertaintyScenarioSet};
use super::EvalError;

/// Which predictions a closed-loop variant replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CPoVariant {
    Both,
    /// `-R`: tailored reserves, raw RES.
    ReserveOnly,
    /// `-W`: tailored RES, raw reserves.
    ResOnly,
}

/// Method acronyms: `O-PO`, `P-PO`, `C-PO-<NT>[-R|-W]`, `T-SP-<NS>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    OPo,
    PPo,
    CPo { nt: usize, variant: CPoVariant },
    TSp { ns: usize },
}

impl Method {
    pub fn is_closed_loop(self) -> bool {
        matches!(self, Method::CPo { .. })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::OPo => write!(f, "O-PO"),
            Method::PPo => write!(f, "P-PO"),
            Method::CPo { nt, variant } => {
                let suffix = match variant {
                    CPoVariant::Both => "",
                    CPoVariant::ReserveOnly => "-R",
                    CPoVariant::ResOnly => "-W",
                };
                write!(f, "C-PO-{nt}{suffix}")
            }
            Method::TSp { ns } => write!(f, "T-SP-{ns}"),
        }
    }
}

impl FromStr for Method {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, EvalError> {
        let bad = || EvalError::Invalid(format!("unknown method tag {s:?}"));
        let count = |n: &str| n.parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(bad);
        match s.trim().to_ascii_uppercase().as_str() {
            "O-PO" => Ok(Method::OPo),
            "P-PO" => Ok(Method::PPo),
            t => {
                if let Some(rest) = t.strip_prefix("T-SP-") {
                    return Ok(Method::TSp { ns: count(rest)? });
                }
                let rest = t.strip_prefix("C-PO-").ok_or_else(bad)?;
                let (n, variant) = match rest.split_once('-') {
                    None => (rest, CPoVariant::Both),
                    Some((n, "R")) => (n, CPoVariant::ReserveOnly),
                    Some((n, "W")) => (n, CPoVariant::ResOnly),
                    Some(_) => return Err(bad()),
                };
                Ok(Method::CPo { nt: count(n)?, variant })
            }
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome of one method on one day. `actual_cost == breakdown.total()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub day: String,
    pub method: Method,
    pub actual_cost: f64,
    pub breakdown: CostReport,
    /// RES prediction the UC saw, `[t][j]`.
    pub res_prediction: Matrix,
    /// Reserve requirement the UC saw; zero for methods without reserve rows.
    pub reserve: Vec<ReserveRequirement>,
    /// Scheduled spinning / non-spinning reserve summed over units, per hour.
    pub scheduled_sr: Vec<f64>,
    pub scheduled_nr: Vec<f64>,
}

impl EvaluationRecord {
    fn new(day: &str, method: Method, res: Matrix, reserve: Vec<ReserveRequirement>, op: &OperationResult) -> Self {
        EvaluationRecord {
            day: day.to_string(),
            method,
            actual_cost: op.report.total(),
            breakdown: op.report,
            res_prediction: res,
            reserve,
            scheduled_sr: op.plan.rsr.iter().map(|r| r.iter().sum()).collect(),
            scheduled_nr: op.plan.rnr.iter().map(|r| r.iter().sum()).collect(),
        }
    }
}

/// Excess of the perfect-information cost over the open-loop cost on a
/// slack-free day, beyond `allowance`. Perfect RES information with the same
/// reserves usually cannot cost more; a positive excess marks the day for
/// inspection.
pub fn perfect_information_excess(opo: &EvaluationRecord, ppo: &EvaluationRecord, allowance: f64) -> Option<f64> {
    let slack_free = opo.breakdown.slack == 0.0 && ppo.breakdown.slack == 0.0;
    let excess = ppo.actual_cost - opo.actual_cost;
    (slack_free && excess > allowance).then_some(excess)
}

/// Open-loop baseline on the raw predictions.
pub fn run_open_loop_record(
    system: &PowerSystem,
    scenario: &OperationScenario,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<EvaluationRecord, EvalError> {
    let res = scenario.raw_res_prediction.clone();
    let reserve = scenario.raw_reserve.clone();
    let op = run_with_predictions(system, scenario, &res, &reserve, penalties, opts)?;
    Ok(EvaluationRecord::new(&scenario.id, Method::OPo, res, reserve, &op))
}

/// The pipeline on tailored predictions `W(f^w)`, `R(f^r)`. Tagged with the
/// number of training days the pair records; callers may retag the variant.
pub fn run_prescriptive_uc(
    system: &PowerSystem,
    pair: &AffinePredictorPair,
    scenario: &OperationScenario,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<EvaluationRecord, EvalError> {
    pair.validate()?;
    let (res, reserve) = pair.predict(scenario)?;
    let op = run_with_predictions(system, scenario, &res, &reserve, penalties, opts)?;
    let method = Method::CPo { nt: pair.metadata.training_days.len().max(1), variant: CPoVariant::Both };
    Ok(EvaluationRecord::new(&scenario.id, method, res, reserve, &op))
}

/// Perfect RES information with the raw reserve requirement.
pub fn run_perfect(
    system: &PowerSystem,
    scenario: &OperationScenario,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<EvaluationRecord, EvalError> {
    let res = scenario.actual_res.clone();
    let reserve = scenario.raw_reserve.clone();
    let op = run_with_predictions(system, scenario, &res, &reserve, penalties, opts)?;
    Ok(EvaluationRecord::new(&scenario.id, Method::PPo, res, reserve, &op))
}

/// Stochastic commitment over `set`, then the hindsight dispatch on the
/// day's realization.
pub fn run_tsp(
    system: &PowerSystem,
    scenario: &OperationScenario,
    set: &UncertaintyScenarioSet,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<EvaluationRecord, EvalError> {
    scenario.validate(system)?;
    let sol = solve_tsp(system, &scenario.raw_res_prediction, &scenario.raw_load_prediction, set, penalties, opts)?;
    let outcome = solve_ed(system, &sol.plan, &scenario.actual_res, &scenario.actual_load, penalties, opts)?;
    let report = CostReport::new(&sol.plan, &outcome);
    let op = OperationResult { plan: sol.plan, outcome, report };
    let reserve = vec![ReserveRequirement::default(); system.horizon()];
    Ok(EvaluationRecord::new(&scenario.id, Method::TSp { ns: set.len() }, scenario.raw_res_prediction.clone(), reserve, &op))
}
