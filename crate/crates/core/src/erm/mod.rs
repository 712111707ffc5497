//! Cost-oriented training of the affine predictors.
//!
//! The training problem is a bilevel program: the leader picks predictor
//! coefficients, the follower commits units on the tailored predictions, and
//! the leader pays the actual cost of that commitment after hindsight
//! dispatch. It is solved by column-and-constraint generation between two
//! subproblems (anticipated cost, then optimistic tie-break) and a master
//! high-point problem with KKT optimality cuts.

mod ccg;
mod master;
mod oracle;
mod subproblems;

pub use ccg::{train, write_training_log, CcgState, IterationLog, TrainingStatus};
pub use master::{build_master, CutBlock, MasterModel, ScenarioBlock};
pub use oracle::{
    brute_force_erm, enumerate_patterns, grid_search, scalar_m_pair, verify_enumeration, GridPoint, GridSearch,
    EnumerationReport, PATTERN_CAP,
};
pub use subproblems::{evaluate_pair, solve_sp1, solve_sp2, Pattern, PairEvaluation, ScenarioEvaluation, Sp1Result, Sp2Result};

use serde::{Deserialize, Serialize};

use crate::data::{OperationScenario, PowerSystem};
use crate::milp::{MilpError, SolveOptions, DEFAULT_BIG_M};
use crate::ops::{OpsError, Penalties};
use crate::predictors::{AffinePredictorPair, PredictorError, PredictorStructure};

/// Price of the system slacks in the cut LPs, $/MW.
pub const DEFAULT_CUT_SLACK_PENALTY: f64 = 1e4;

pub const DEFAULT_LAMBDA: f64 = 1e6;

#[derive(Debug, thiserror::Error)]
pub enum ErmError {
    #[error(transparent)]
    Ops(#[from] OpsError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training instance {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: OpsError,
    },
    #[error("scenario {scenario}: the tie-break problem is infeasible with tolerance {tolerance}; increase sp2_tolerance")]
    Sp2Infeasible { scenario: String, tolerance: f64 },
    #[error("lower bound fell from {previous} to {current} at iteration {iteration}")]
    NonMonotoneBound { iteration: usize, previous: f64, current: f64 },
    #[error("master problem failed at iteration {iteration}: {reason}")]
    Master { iteration: usize, reason: String },
    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),
    #[error("output error: {0}")]
    Io(String),
}

/// Inputs of the training problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub scenarios: Vec<OperationScenario>,
    pub structure: PredictorStructure,
    pub lambda_w: f64,
    pub lambda_r: f64,
    /// Relative optimality gap at which the loop stops.
    pub gap_target: f64,
    /// Maximum number of master solves.
    pub max_iterations: usize,
    pub big_m_primal: f64,
    pub big_m_dual: f64,
    pub solver: SolveOptions,
    /// Slack on the anticipated-cost cap of the tie-break problem, dollars;
    /// `None` uses `max(1, gap * c_ant)`.
    pub sp2_tolerance: Option<f64>,
    pub cut_slack_penalty: f64,
    pub penalties: Penalties,
    /// Worker threads for the per-scenario subproblems; `None` uses all cores.
    pub workers: Option<usize>,
    /// Starting predictors; `None` uses the identity pair.
    pub initial: Option<AffinePredictorPair>,
}

impl TrainingConfig {
    pub fn new(scenarios: Vec<OperationScenario>) -> Self {
        TrainingConfig {
            scenarios,
            structure: PredictorStructure::default(),
            lambda_w: DEFAULT_LAMBDA,
            lambda_r: DEFAULT_LAMBDA,
            gap_target: 0.01,
            max_iterations: 30,
            big_m_primal: DEFAULT_BIG_M,
            big_m_dual: DEFAULT_BIG_M,
            solver: SolveOptions::default(),
            sp2_tolerance: None,
            cut_slack_penalty: DEFAULT_CUT_SLACK_PENALTY,
            penalties: Penalties::default(),
            workers: None,
            initial: None,
        }
    }

    pub fn validate(&self, system: &PowerSystem) -> Result<(), ErmError> {
        if self.scenarios.is_empty() {
            return Err(ErmError::Config("at least one training scenario is required".into()));
        }
        if !(self.gap_target > 0.0) {
            return Err(ErmError::Config(format!("gap target {} must be positive", self.gap_target)));
        }
        if self.max_iterations == 0 {
            return Err(ErmError::Config("the iteration limit must be at least 1".into()));
        }
        if !(self.big_m_primal > 0.0 && self.big_m_dual > 0.0) {
            return Err(ErmError::Config("Big-M constants must be positive".into()));
        }
        if self.lambda_w < 0.0 || self.lambda_r < 0.0 {
            return Err(ErmError::Config("regularization weights must be nonnegative".into()));
        }
        if matches!(self.sp2_tolerance, Some(t) if !(t >= 0.0)) {
            return Err(ErmError::Config("sp2_tolerance must be nonnegative".into()));
        }
        for s in &self.scenarios {
            s.validate(system).map_err(OpsError::from)?;
        }
        if let Some(p) = &self.initial {
            p.validate()?;
            if p.horizon != system.horizon() || p.res_count != system.num_res() || p.mapping() != self.structure.mapping {
                return Err(ErmError::Config("initial predictors do not match the system or mapping".into()));
            }
        }
        Ok(())
    }

    /// Allowed excess over `c_ant` in the tie-break problem.
    pub fn cap_tolerance(&self, c_ant: f64) -> f64 {
        self.sp2_tolerance.unwrap_or_else(|| (self.solver.gap * c_ant.abs()).max(1.0))
    }

    pub fn initial_pair(&self, system: &PowerSystem) -> AffinePredictorPair {
        self.initial.clone().unwrap_or_else(|| {
            AffinePredictorPair::identity(system.horizon(), system.num_res(), self.structure.alpha, self.structure.mapping)
        })
    }

    /// `avg + λw ‖m‖₁ − λr ‖n‖₁`.
    pub fn regularized(&self, pair: &AffinePredictorPair, average_cost: f64) -> f64 {
        average_cost + self.lambda_w * pair.l1_res() - self.lambda_r * pair.l1_reserve()
    }
}
