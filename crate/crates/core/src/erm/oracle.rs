//! Verification oracles for the trainer.
//!
//! [`brute_force_erm`] evaluates the two-lower-level training objective at a
//! fixed predictor pair by enumerating every commitment pattern: the UC-LP at
//! each pattern gives the anticipated-cost optimum and its ties, and a
//! dispatch solved on each tied pattern gives the optimistic actual cost. It
//! shares no code path with the joint tie-break model used in training.

use serde::{Deserialize, Serialize};

use crate::data::{OperationScenario, PowerSystem};
use crate::milp::{fix_binaries, solve, LinExpr, Sense, SolveStatus};
use crate::ops::{build_ed_into, build_uc, OpsError, PlanRef, UcInputs, UcOptions};
use crate::predictors::{AffinePredictorPair, PredictorStructure, TrainTarget};

use super::ccg::{train, TrainingStatus};
use super::subproblems::{evaluate_pair, Pattern};
use super::{ErmError, TrainingConfig};

/// Largest number of commitment patterns the oracles enumerate.
pub const PATTERN_CAP: usize = 4096;

/// Every on/off and non-spinning pattern of `system`; start-up and
/// shut-down flags follow from the on/off sequence.
pub fn enumerate_patterns(system: &PowerSystem) -> Result<Vec<Pattern>, ErmError> {
    let nt = system.horizon();
    let units = &system.thermal_units;
    // per unit-hour state: 0 off, 1 on, 2 off with non-spinning reserve
    let choices: Vec<usize> = (0..nt).flat_map(|_| units.iter().map(|g| if g.quick_start { 3 } else { 2 })).collect();
    let count = choices.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c).filter(|n| *n <= PATTERN_CAP));
    let Some(count) = count else {
        return Err(ErmError::TooLarge(format!(
            "{} units over {nt} hours exceed {PATTERN_CAP} commitment patterns",
            units.len()
        )));
    };
    let mut out = Vec::with_capacity(count);
    for mut code in 0..count {
        let mut bits = Vec::with_capacity(4 * choices.len());
        let mut prev: Vec<bool> = units.iter().map(|g| g.initial_status.committed).collect();
        for t in 0..nt {
            for (i, _) in units.iter().enumerate() {
                let c = choices[t * units.len() + i];
                let state = code % c;
                code /= c;
                let on = state == 1;
                bits.extend([on, on && !prev[i], !on && prev[i], state == 2]);
                prev[i] = on;
            }
        }
        out.push(Pattern(bits));
    }
    Ok(out)
}

/// Optimistic actual cost of one scenario at fixed predictions, by enumeration.
fn brute_force_scenario(
    system: &PowerSystem,
    config: &TrainingConfig,
    scenario: &OperationScenario,
    pair: &AffinePredictorPair,
    patterns: &[Pattern],
) -> Result<f64, ErmError> {
    let (res, reserve) = pair.predict(scenario)?;
    let uc = build_uc(system, &UcInputs::constant(&res, &reserve, &scenario.raw_load_prediction), UcOptions::default())?;
    let exact = crate::milp::SolveOptions::exact();

    let mut feasible = Vec::new();
    for p in patterns {
        let fixed = fix_binaries(&uc.model, &p.assignment(&uc.vars))?;
        let r = solve(&fixed.lp, &exact)?;
        match r.status {
            SolveStatus::Optimal => feasible.push((p, fixed, r.objective)),
            SolveStatus::Infeasible => {}
            s => {
                return Err(ErmError::Milp(crate::milp::MilpError::NotSolved { what: "fixed-pattern UC".into(), status: s }))
            }
        }
    }
    let c_ant = feasible.iter().map(|f| f.2).fold(f64::INFINITY, f64::min);
    if !c_ant.is_finite() {
        return Err(ErmError::Scenario {
            scenario: scenario.id.clone(),
            source: OpsError::UcInfeasible("no commitment pattern is feasible".into()),
        });
    }
    let cap = c_ant + config.cap_tolerance(c_ant);

    let mut best = f64::INFINITY;
    for (p, fixed, value) in feasible {
        if value > cap {
            continue;
        }
        let mut model = fixed.lp.clone();
        model.add_constraint("anticipated_cap", fixed.lp.objective_expr(), Sense::Le, cap);
        let col = |v| LinExpr::var(fixed.lp_var(v).expect("continuous UC column"));
        let flag = |v| LinExpr::constant(fixed.assignment[&v]);
        let v = &uc.vars;
        let grid = |f: &dyn Fn(usize, usize) -> LinExpr| -> Vec<Vec<LinExpr>> {
            (0..v.i.len()).map(|t| (0..v.i[t].len()).map(|i| f(t, i)).collect()).collect()
        };
        let plan = PlanRef {
            i: grid(&|t, i| flag(v.i[t][i])),
            o: grid(&|t, i| flag(v.o[t][i])),
            p: grid(&|t, i| v.psg[t][i].iter().fold(LinExpr::new(), |acc, &s| acc + col(s))),
            rsr: grid(&|t, i| col(v.rsr[t][i])),
            rnr: grid(&|t, i| col(v.rnr[t][i])),
        };
        let ed = build_ed_into(&mut model, system, &plan, &scenario.actual_res, &scenario.actual_load, &config.penalties)?;
        model.objective.clear();
        model.objective_constant = 0.0;
        model.add_objective(&(LinExpr::constant(p.commitment_cost(v)) + ed.cost()));
        let r = solve(&model, &exact)?.require_optimal("dispatch on a tied pattern").map_err(OpsError::from)?;
        best = best.min(r.objective);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub m: f64,
    pub average_cost: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub points: Vec<GridPoint>,
    pub best: GridPoint,
}

impl GridSearch {
    fn from_points(points: Vec<GridPoint>) -> Self {
        let best = *points.iter().min_by(|a, b| a.objective.total_cmp(&b.objective)).expect("non-empty grid");
        GridSearch { points, best }
    }
}

/// Predictors with every RES multiplier equal to `m` and the reserve map at
/// its rule-of-thumb identity.
pub fn scalar_m_pair(system: &PowerSystem, structure: &PredictorStructure, m: f64) -> AffinePredictorPair {
    let mut p = AffinePredictorPair::identity(system.horizon(), system.num_res(), structure.alpha, structure.mapping);
    p.m.iter_mut().flatten().for_each(|v| *v = m);
    p
}

/// Objective of the two-lower-level training problem at `pair`, by
/// enumeration of commitment patterns.
pub fn brute_force_erm(system: &PowerSystem, config: &TrainingConfig, pair: &AffinePredictorPair) -> Result<GridPoint, ErmError> {
    let patterns = enumerate_patterns(system)?;
    let mut total = 0.0;
    for s in &config.scenarios {
        total += brute_force_scenario(system, config, s, pair, &patterns)?;
    }
    let average_cost = total / config.scenarios.len() as f64;
    let m = pair.m.first().and_then(|r| r.first()).copied().unwrap_or(0.0);
    Ok(GridPoint { m, average_cost, objective: config.regularized(pair, average_cost) })
}

/// Black-box objective over a grid of scalar RES multipliers, each point
/// evaluated through the two subproblems.
pub fn grid_search(system: &PowerSystem, config: &TrainingConfig, grid: &[f64]) -> Result<GridSearch, ErmError> {
    if grid.is_empty() {
        return Err(ErmError::Config("empty grid".into()));
    }
    let points = grid
        .iter()
        .map(|&m| {
            let pair = scalar_m_pair(system, &config.structure, m);
            let e = evaluate_pair(system, config, &pair)?;
            Ok(GridPoint { m, average_cost: e.average_cost, objective: e.objective })
        })
        .collect::<Result<Vec<_>, ErmError>>()?;
    Ok(GridSearch::from_points(points))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub patterns: usize,
    pub grid: Vec<GridPoint>,
    /// Best enumerated objective over the grid.
    pub brute_force: GridPoint,
    /// Objective reached by column-and-constraint generation.
    pub ccg_objective: f64,
    pub ccg_m: f64,
    pub ccg_status: TrainingStatus,
    pub relative_difference: f64,
    pub tolerance: f64,
    pub agrees: bool,
}

/// Compares the enumerated optimum over `grid` with the trained optimum.
/// The trainer must be restricted to a scalar RES multiplier with the
/// reserve map pinned, which is the family the grid spans.
pub fn verify_enumeration(system: &PowerSystem, config: &TrainingConfig, grid: &[f64]) -> Result<EnumerationReport, ErmError> {
    if !(config.structure.scalar_m && config.structure.target == TrainTarget::ResOnly) {
        return Err(ErmError::Config("verification needs a scalar RES multiplier and a pinned reserve map".into()));
    }
    if grid.is_empty() {
        return Err(ErmError::Config("empty grid".into()));
    }
    let patterns = enumerate_patterns(system)?.len();
    let points = grid
        .iter()
        .map(|&m| brute_force_erm(system, config, &scalar_m_pair(system, &config.structure, m)))
        .collect::<Result<Vec<_>, ErmError>>()?;
    let brute = GridSearch::from_points(points);
    let (pair, state) = train(system, config)?;
    let ccg_objective = state.ub;
    let relative_difference = (brute.best.objective - ccg_objective).abs() / brute.best.objective.abs().max(1e-9);
    let tolerance = config.gap_target;
    Ok(EnumerationReport {
        patterns,
        grid: brute.points,
        brute_force: brute.best,
        ccg_objective,
        ccg_m: pair.m[0][0],
        ccg_status: state.status,
        relative_difference,
        tolerance,
        agrees: relative_difference <= tolerance,
    })
}
