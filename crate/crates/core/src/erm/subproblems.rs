use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{OperationScenario, PowerSystem};
use crate::milp::{solve, LinearModel, Sense, SolveOptions, SolveStatus, VarId};
use crate::ops::{
    build_ed_into, build_uc_into, solve_uc, CommitmentPlan, CostReport, DispatchOutcome, OpsError, Penalties, PlanRef,
    UcInputs, UcOptions, UcVars,
};
use crate::predictors::AffinePredictorPair;

use super::{ErmError, TrainingConfig};

/// UC binaries in [`UcVars::binaries`] order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern(pub Vec<bool>);

impl Pattern {
    pub fn from_values(vars: &UcVars, values: &[f64]) -> Self {
        Pattern(vars.binaries().iter().map(|v| values[v.0] > 0.5).collect())
    }

    pub fn assignment(&self, vars: &UcVars) -> BTreeMap<VarId, f64> {
        vars.binaries().into_iter().zip(&self.0).map(|(v, &b)| (v, if b { 1.0 } else { 0.0 })).collect()
    }

    /// Commitment cost `b'x` of this pattern.
    pub fn commitment_cost(&self, vars: &UcVars) -> f64 {
        let values = self.assignment(vars);
        vars.commitment_cost.terms.iter().map(|(v, c)| c * values.get(v).copied().unwrap_or(0.0)).sum::<f64>()
            + vars.commitment_cost.constant
    }
}

#[derive(Debug, Clone)]
pub struct Sp1Result {
    /// `c_ant`: optimal anticipated cost.
    pub anticipated_cost: f64,
    pub plan: CommitmentPlan,
}

/// UC on the incumbent predictions.
pub fn solve_sp1(
    system: &PowerSystem,
    scenario: &OperationScenario,
    pair: &AffinePredictorPair,
    opts: &SolveOptions,
) -> Result<Sp1Result, ErmError> {
    pair.validate()?;
    let (res, reserve) = pair.predict(scenario)?;
    let plan = solve_uc(system, &res, &reserve, &scenario.raw_load_prediction, opts)
        .map_err(|e| ErmError::Scenario { scenario: scenario.id.clone(), source: e })?;
    Ok(Sp1Result { anticipated_cost: plan.anticipated_cost(), plan })
}

#[derive(Debug, Clone)]
pub struct Sp2Result {
    /// `c_act`: actual cost of the selected commitment.
    pub actual_cost: f64,
    pub pattern: Pattern,
    pub plan: CommitmentPlan,
    pub outcome: DispatchOutcome,
    pub report: CostReport,
}

/// Among commitments whose anticipated cost is within `tolerance` of
/// `c_ant`, the one with the least actual cost.
pub fn solve_sp2(
    system: &PowerSystem,
    scenario: &OperationScenario,
    pair: &AffinePredictorPair,
    c_ant: f64,
    tolerance: f64,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<Sp2Result, ErmError> {
    let (res, reserve) = pair.predict(scenario)?;
    let inputs = UcInputs::constant(&res, &reserve, &scenario.raw_load_prediction);
    let mut model = LinearModel::new();
    let uc = build_uc_into(&mut model, system, &inputs, UcOptions::default())?;
    let ed = build_ed_into(&mut model, system, &PlanRef::variable(&uc), &scenario.actual_res, &scenario.actual_load, penalties)?;
    if tolerance.is_finite() {
        model.add_constraint("anticipated_cap", uc.anticipated_cost(), Sense::Le, c_ant + tolerance);
    }
    model.add_objective(&(uc.commitment_cost.clone() + ed.cost()));
    let r = solve(&model, opts)?;
    if r.status == SolveStatus::Infeasible {
        return Err(ErmError::Sp2Infeasible { scenario: scenario.id.clone(), tolerance });
    }
    let r = r.require_optimal("tie-break problem").map_err(OpsError::from)?;
    let plan = CommitmentPlan::from_solution(system, &uc, &r.values);
    let outcome = DispatchOutcome::from_solution(system, &ed, &r.values, penalties);
    let report = CostReport::new(&plan, &outcome);
    Ok(Sp2Result { actual_cost: report.total(), pattern: Pattern::from_values(&uc, &r.values), plan, outcome, report })
}

#[derive(Debug, Clone)]
pub struct ScenarioEvaluation {
    pub scenario: String,
    pub sp1: Sp1Result,
    pub sp2: Sp2Result,
}

#[derive(Debug, Clone)]
pub struct PairEvaluation {
    pub scenarios: Vec<ScenarioEvaluation>,
    pub average_cost: f64,
    /// Average cost plus regularization.
    pub objective: f64,
}

/// Runs SP1 then SP2 on every training scenario, in parallel.
pub fn evaluate_pair(
    system: &PowerSystem,
    config: &TrainingConfig,
    pair: &AffinePredictorPair,
) -> Result<PairEvaluation, ErmError> {
    let run = || -> Result<Vec<ScenarioEvaluation>, ErmError> {
        config
            .scenarios
            .par_iter()
            .map(|s| {
                let sp1 = solve_sp1(system, s, pair, &config.solver)?;
                let tol = config.cap_tolerance(sp1.anticipated_cost);
                let sp2 = solve_sp2(system, s, pair, sp1.anticipated_cost, tol, &config.penalties, &config.solver)?;
                Ok(ScenarioEvaluation { scenario: s.id.clone(), sp1, sp2 })
            })
            .collect()
    };
    let scenarios = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ErmError::Config(format!("cannot start {n} workers: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let average_cost = scenarios.iter().map(|e| e.sp2.actual_cost).sum::<f64>() / scenarios.len() as f64;
    Ok(PairEvaluation { objective: config.regularized(pair, average_cost), average_cost, scenarios })
}
