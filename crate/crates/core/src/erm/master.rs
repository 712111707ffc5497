//! High-point master problem with KKT optimality cuts.
//!
//! Per scenario the master holds a copy of the UC constrained by the
//! predictor columns (`x_dv`, `y_dv`) and a dispatch on that copy. Every
//! enumerated commitment `x_ev` adds the KKT system of the UC-LP at fixed
//! `x_ev`, parametric in the predictor columns, and the objective cut
//! `b'x_dv + c'y_dv <= b'x_ev + c'y_gv`.
//!
//! The cut LP carries penalized system slacks so that a commitment that
//! cannot serve the predicted load at some predictor yields a large finite
//! cut value instead of making that predictor infeasible.

use std::collections::HashMap;

use crate::data::{OperationScenario, PowerSystem};
use crate::milp::{derive_kkt, fix_binaries, fold_singletons, solve, KktOptions, KktSystem, LinExpr, LinearModel, Sense, SolveOptions, VarId};
use crate::ops::{build_ed_into, build_uc_into, EdVars, PlanRef, UcInputs, UcOptions, UcVars};
use crate::predictors::{AffinePredictorPair, PredictorStructure, PredictorVars};

use super::subproblems::Pattern;
use super::{ErmError, TrainingConfig};

#[derive(Debug, Clone)]
pub struct ScenarioBlock {
    pub uc: UcVars,
    pub ed: EdVars,
}

#[derive(Debug, Clone)]
pub struct CutBlock {
    pub scenario: usize,
    pub pattern: Pattern,
    /// KKT system in its own column space.
    pub kkt: KktSystem,
    /// KKT column -> master column.
    pub map: Vec<VarId>,
    /// `b'x_dv + c'y_dv` over master columns.
    pub lhs: LinExpr,
    /// `b'x_ev + c'y_gv` (+ slack penalty) over master columns.
    pub rhs: LinExpr,
}

#[derive(Debug, Clone)]
pub struct MasterModel {
    pub model: LinearModel,
    pub predictor: PredictorVars,
    pub scenarios: Vec<ScenarioBlock>,
    pub cuts: Vec<CutBlock>,
}

/// UC with predictor columns as inputs, penalized slacks, own model.
fn parametric_uc(
    system: &PowerSystem,
    scenario: &OperationScenario,
    structure: &PredictorStructure,
    slack_penalty: f64,
) -> Result<(LinearModel, PredictorVars, UcVars), ErmError> {
    let mut model = LinearModel::new();
    let pv = PredictorVars::add_to(&mut model, system.horizon(), system.num_res(), structure);
    let inputs = predictor_inputs(&pv, scenario);
    let uc = build_uc_into(&mut model, system, &inputs, UcOptions { reserve_rows: true, system_slack: Some(slack_penalty) })?;
    model.add_objective(&(uc.anticipated_cost() + uc.slack_cost.clone()));
    Ok((model, pv, uc))
}

fn predictor_inputs(pv: &PredictorVars, scenario: &OperationScenario) -> UcInputs {
    let (sr_req, nr_req) = pv.reserve(&scenario.features_reserve());
    UcInputs { res_cap: pv.res_cap(scenario.features_res()), sr_req, nr_req, load: scenario.raw_load_prediction.clone() }
}

fn map_expr(e: &LinExpr, map: &[VarId]) -> LinExpr {
    let mut out = LinExpr::constant(e.constant);
    for &(v, c) in &e.terms {
        out.add_term(map[v.0], c);
    }
    out
}

/// Builds the master for `cuts[s]` enumerated commitments of scenario `s`.
pub fn build_master(system: &PowerSystem, config: &TrainingConfig, cuts: &[Vec<Pattern>]) -> Result<MasterModel, ErmError> {
    let scenarios = &config.scenarios;
    if cuts.len() != scenarios.len() || cuts.iter().any(Vec::is_empty) {
        return Err(ErmError::Config("the master needs at least one enumerated commitment per scenario".into()));
    }
    let mut model = LinearModel::new();
    let predictor = PredictorVars::add_to(&mut model, system.horizon(), system.num_res(), &config.structure);
    let shared_cols = predictor.columns();

    let mut blocks = Vec::with_capacity(scenarios.len());
    let mut objective = LinExpr::new();
    let weight = 1.0 / scenarios.len() as f64;
    for s in scenarios {
        let uc = build_uc_into(&mut model, system, &predictor_inputs(&predictor, s), UcOptions::default())?;
        let ed = build_ed_into(&mut model, system, &PlanRef::variable(&uc), &s.actual_res, &s.actual_load, &config.penalties)?;
        objective.add_expr(&uc.commitment_cost, weight).add_expr(&ed.cost(), weight);
        blocks.push(ScenarioBlock { uc, ed });
    }
    objective.add_expr(&predictor.l1_res(), config.lambda_w).add_expr(&predictor.l1_reserve(), -config.lambda_r);
    model.add_objective(&objective);

    let mut cut_blocks = Vec::new();
    for (si, (s, patterns)) in scenarios.iter().zip(cuts).enumerate() {
        for (e, pattern) in patterns.iter().enumerate() {
            let (lp, pv, uc) = parametric_uc(system, s, &config.structure, config.cut_slack_penalty)?;
            let fixed = fix_binaries(&lp, &pattern.assignment(&uc))?;
            let local_cols = pv.columns();
            let params: Vec<VarId> = local_cols.iter().map(|&c| fixed.lp_var(c).expect("predictor columns are continuous")).collect();
            let lp = fold_singletons(&fixed.lp, &params);
            let kkt = derive_kkt(
                &lp,
                &KktOptions { big_m_primal: config.big_m_primal, big_m_dual: config.big_m_dual, parameters: params.clone() },
            )?;
            let shared: HashMap<VarId, VarId> = params.iter().copied().zip(shared_cols.iter().copied()).collect();
            let map = model.append(&kkt.model, &format!("cut[{si},{e}]:"), &shared);
            let lhs = blocks[si].uc.anticipated_cost();
            let rhs = map_expr(&kkt.objective, &map);
            model.add_constraint(format!("objective_cut[{si},{e}]"), lhs.clone() - rhs.clone(), Sense::Le, 0.0);
            cut_blocks.push(CutBlock { scenario: si, pattern: pattern.clone(), kkt, map, lhs, rhs });
        }
    }
    Ok(MasterModel { model, predictor, scenarios: blocks, cuts: cut_blocks })
}

impl MasterModel {
    pub fn read_predictor(&self, values: &[f64]) -> AffinePredictorPair {
        self.predictor.read(values)
    }

    /// Largest `lhs - rhs` over the objective cuts at `values`.
    pub fn cut_violation(&self, values: &[f64]) -> f64 {
        self.cuts.iter().map(|c| c.lhs.eval(values) - c.rhs.eval(values)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of complementarity pairs, over all cuts, whose Big-M bound is
    /// within `tol` of binding.
    pub fn binding_big_m(&self, values: &[f64], tol: f64) -> usize {
        self.cuts
            .iter()
            .map(|c| {
                let local: Vec<f64> = c.map.iter().map(|v| values[v.0]).collect();
                c.kkt.binding_big_m(&local, tol).len()
            })
            .sum()
    }

    /// For every cut, re-solves its fixed-commitment UC-LP directly at the
    /// predictor read from `values` and returns the largest relative
    /// difference to the embedded cut value.
    pub fn kkt_soundness(&self, system: &PowerSystem, config: &TrainingConfig, values: &[f64]) -> Result<f64, ErmError> {
        let mut worst: f64 = 0.0;
        for c in &self.cuts {
            let s = &config.scenarios[c.scenario];
            let (lp, pv, uc) = parametric_uc(system, s, &config.structure, config.cut_slack_penalty)?;
            let mut pinned = lp;
            for (&col, &master_col) in pv.columns().iter().zip(&self.predictor.columns()) {
                let v = values[master_col.0].max(0.0);
                pinned.variables[col.0].lower = v;
                pinned.variables[col.0].upper = v;
            }
            let fixed = fix_binaries(&pinned, &c.pattern.assignment(&uc))?;
            let direct = solve(&fixed.lp, &SolveOptions::exact())?.require_optimal("cut LP")?.objective;
            let embedded = c.rhs.eval(values);
            worst = worst.max((direct - embedded).abs() / direct.abs().max(1.0));
        }
        Ok(worst)
    }
}
