//! Day-ahead commitment, hindsight dispatch and actual-cost accounting.

mod ed;
mod pipeline;
mod plan;
mod uc;

pub use ed::{build_ed, build_ed_into, EdModel, EdVars, PlanRef};
pub use pipeline::{run_open_loop, run_with_predictions, solve_ed, solve_uc, OperationResult};
pub use plan::{write_cost_csv, CommitmentPlan, CostReport, DispatchOutcome};
pub use uc::{build_uc, build_uc_into, UcInputs, UcModel, UcOptions, UcVars};

use serde::{Deserialize, Serialize};

use crate::data::DataError;
use crate::milp::MilpError;

/// Dispatch slack prices in $/MWh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    pub shortfall: f64,
    pub surplus: f64,
    pub flow: f64,
}

pub const DEFAULT_PENALTY: f64 = 2000.0;

impl Default for Penalties {
    fn default() -> Self {
        Self { shortfall: DEFAULT_PENALTY, surplus: DEFAULT_PENALTY, flow: DEFAULT_PENALTY }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OpsError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("negative input: {0}")]
    NegativeInput(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("unit commitment is infeasible: {0}")]
    UcInfeasible(String),
    #[error("output error: {0}")]
    Io(String),
}

impl OpsError {
    pub(crate) fn in_scenario(self, id: &str) -> Self {
        match self {
            OpsError::UcInfeasible(msg) => OpsError::UcInfeasible(format!("scenario {id}: {msg}")),
            e => e,
        }
    }
}
