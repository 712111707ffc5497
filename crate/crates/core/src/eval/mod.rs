//! Baselines, prescriptive evaluation and economic metrics.

mod asymmetry;
mod metrics;
mod records;
mod tsp;

pub use asymmetry::{asymmetry_experiment, write_asymmetry_csv, AsymmetryPoint, AsymmetryTable, BranchSummary};
pub use metrics::{metric_ei, metric_loss, metric_voi, stats_metrics, StatsMetrics, PERCENT_THRESHOLD_MW};
pub use records::{
    perfect_information_excess, run_open_loop_record, run_perfect, run_prescriptive_uc, run_tsp, CPoVariant, EvaluationRecord, Method,
};
pub use tsp::{
    generate_scenarios, reduce_scenarios, solve_tsp, tsp_value_of_plan, Realization, ScenarioBounds, TspSolution,
    UncertaintyScenarioSet,
};

use crate::data::DataError;
use crate::milp::MilpError;
use crate::ops::OpsError;
use crate::predictors::PredictorError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Ops(#[from] OpsError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{metric} is undefined: zero denominator")]
    ZeroDenominator { metric: &'static str },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("output error: {0}")]
    Io(String),
}
