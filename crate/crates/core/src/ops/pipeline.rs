use serde::{Deserialize, Serialize};

use crate::data::{Matrix, OperationScenario, PowerSystem, ReserveRequirement};
use crate::milp::{solve, SolveOptions, SolveStatus};

use super::ed::build_ed;
use super::plan::{CommitmentPlan, CostReport, DispatchOutcome};
use super::uc::{build_uc, UcInputs, UcOptions};
use super::{OpsError, Penalties};

/// Solves the UC for constant predictions and reads back the plan.
pub fn solve_uc(
    system: &PowerSystem,
    res_prediction: &Matrix,
    reserve: &[ReserveRequirement],
    load_prediction: &Matrix,
    opts: &SolveOptions,
) -> Result<CommitmentPlan, OpsError> {
    let inputs = UcInputs::constant(res_prediction, reserve, load_prediction);
    let uc = build_uc(system, &inputs, UcOptions::default())?;
    let res = solve(&uc.model, opts)?;
    match res.status {
        SolveStatus::Infeasible => Err(OpsError::UcInfeasible("no commitment meets the predicted load and reserve".into())),
        _ if res.has_solution() => Ok(CommitmentPlan::from_solution(system, &uc.vars, &res.values)),
        s => Err(OpsError::Milp(crate::milp::MilpError::NotSolved { what: "unit commitment".into(), status: s })),
    }
}

/// Solves the hindsight dispatch of `plan`; slacks make it always feasible.
pub fn solve_ed(
    system: &PowerSystem,
    plan: &CommitmentPlan,
    actual_res: &Matrix,
    actual_load: &Matrix,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<DispatchOutcome, OpsError> {
    let ed = build_ed(system, plan, actual_res, actual_load, penalties)?;
    let res = solve(&ed.model, opts)?.require_optimal("economic dispatch")?;
    Ok(DispatchOutcome::from_solution(system, &ed.vars, &res.values, penalties))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationResult {
    pub plan: CommitmentPlan,
    pub outcome: DispatchOutcome,
    pub report: CostReport,
}

/// UC on the given predictions, then dispatch against the scenario's
/// realizations.
pub fn run_with_predictions(
    system: &PowerSystem,
    scenario: &OperationScenario,
    res_prediction: &Matrix,
    reserve: &[ReserveRequirement],
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<OperationResult, OpsError> {
    scenario.validate(system)?;
    let plan = solve_uc(system, res_prediction, reserve, &scenario.raw_load_prediction, opts)
        .map_err(|e| e.in_scenario(&scenario.id))?;
    let outcome = solve_ed(system, &plan, &scenario.actual_res, &scenario.actual_load, penalties, opts)?;
    let report = CostReport::new(&plan, &outcome);
    Ok(OperationResult { plan, outcome, report })
}

/// The open-loop pipeline on the scenario's raw predictions.
pub fn run_open_loop(
    system: &PowerSystem,
    scenario: &OperationScenario,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<OperationResult, OpsError> {
    run_with_predictions(system, scenario, &scenario.raw_res_prediction, &scenario.raw_reserve, penalties, opts)
}
