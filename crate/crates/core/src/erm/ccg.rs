use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::PowerSystem;
use crate::milp::solve;
use crate::predictors::AffinePredictorPair;

use super::master::build_master;
use super::subproblems::{evaluate_pair, Pattern};
use super::{ErmError, TrainingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingStatus {
    Converged,
    IterationLimit,
    /// The subproblems returned only commitments already in the master.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub lb: f64,
    pub ub: f64,
    pub gap: f64,
    pub wall_seconds: f64,
    pub cuts_total: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CcgState {
    /// Number of master solves so far.
    pub iteration: usize,
    pub lb: f64,
    pub ub: f64,
    /// Enumerated commitments per scenario.
    pub cuts: Vec<Vec<Pattern>>,
    /// Predictors the next subproblems are evaluated at.
    pub incumbent: AffinePredictorPair,
    /// Predictors that produced `ub`.
    pub best: AffinePredictorPair,
    pub log: Vec<IterationLog>,
    pub status: TrainingStatus,
}

impl CcgState {
    pub fn gap(&self) -> f64 {
        relative_gap(self.lb, self.ub)
    }

    pub fn cuts_total(&self) -> usize {
        self.cuts.iter().map(Vec::len).sum()
    }
}

fn relative_gap(lb: f64, ub: f64) -> f64 {
    if lb == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    ((ub - lb) / ub.abs().max(1e-9)).max(0.0)
}

/// Column-and-constraint generation over the training scenarios.
///
/// Returns the predictors with the best evaluated objective; on the
/// iteration limit or a stall the state says so.
pub fn train(system: &PowerSystem, config: &TrainingConfig) -> Result<(AffinePredictorPair, CcgState), ErmError> {
    config.validate(system)?;
    let start = Instant::now();
    let initial = config.initial_pair(system);
    let mut state = CcgState {
        iteration: 0,
        lb: f64::NEG_INFINITY,
        ub: f64::INFINITY,
        cuts: vec![Vec::new(); config.scenarios.len()],
        incumbent: initial.clone(),
        best: initial,
        log: Vec::new(),
        status: TrainingStatus::IterationLimit,
    };

    loop {
        let eval = evaluate_pair(system, config, &state.incumbent)?;
        if eval.objective < state.ub {
            state.ub = eval.objective;
            state.best = state.incumbent.clone();
        }
        let gap = state.gap();
        log::info!("iteration {}: LB {:.4} UB {:.4} gap {:.4}%", state.iteration, state.lb, state.ub, 100.0 * gap);
        state.log.push(IterationLog {
            iteration: state.iteration,
            lb: state.lb,
            ub: state.ub,
            gap,
            wall_seconds: start.elapsed().as_secs_f64(),
            cuts_total: state.cuts_total(),
        });
        if gap <= config.gap_target {
            state.status = TrainingStatus::Converged;
            break;
        }
        if state.iteration >= config.max_iterations {
            state.status = TrainingStatus::IterationLimit;
            break;
        }

        let mut added = false;
        for (set, ev) in state.cuts.iter_mut().zip(&eval.scenarios) {
            if !set.contains(&ev.sp2.pattern) {
                set.push(ev.sp2.pattern.clone());
                added = true;
            }
        }
        if !added {
            state.status = TrainingStatus::Stalled;
            break;
        }

        let master = build_master(system, config, &state.cuts)?;
        let r = solve(&master.model, &config.solver)?;
        if !r.has_solution() {
            return Err(ErmError::Master { iteration: state.iteration + 1, reason: format!("status {:?}", r.status) });
        }
        state.iteration += 1;
        let bound = if r.best_bound.is_finite() { r.best_bound } else { r.objective };
        let allowance = config.solver.gap * state.ub.abs().max(1.0);
        if bound < state.lb - allowance {
            return Err(ErmError::NonMonotoneBound { iteration: state.iteration, previous: state.lb, current: bound });
        }
        state.lb = state.lb.max(bound);
        if state.lb > state.ub + allowance {
            log::warn!("lower bound {} exceeds upper bound {} beyond the solver gap", state.lb, state.ub);
        }
        state.incumbent = master.read_predictor(&r.values);
    }

    let mut best = state.best.clone();
    best.metadata.training_days = config.scenarios.iter().map(|s| s.id.clone()).collect();
    best.metadata.lambda_w = Some(config.lambda_w);
    best.metadata.lambda_r = Some(config.lambda_r);
    best.metadata.erm_objective = Some(state.ub);
    best.metadata.converged = Some(state.status == TrainingStatus::Converged);
    state.best = best.clone();
    Ok((best, state))
}

/// Writes the per-iteration log as CSV.
pub fn write_training_log<W: Write>(out: W, log: &[IterationLog]) -> Result<(), ErmError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| ErmError::Io(e.to_string());
    w.write_record(["iteration", "lb", "ub", "gap", "wall_seconds", "cuts_total"]).map_err(io)?;
    for l in log {
        w.write_record([
            l.iteration.to_string(),
            format!("{:.6}", l.lb),
            format!("{:.6}", l.ub),
            format!("{:.6}", l.gap),
            format!("{:.3}", l.wall_seconds),
            l.cuts_total.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| ErmError::Io(e.to_string()))
}
