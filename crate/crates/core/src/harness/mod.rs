//! Command orchestration: configuration, the weekly rolling
//! retrain-and-evaluate scheme, oracle verification and report files.

mod config;
mod rolling;
mod verify;

pub use config::{
    apply_overrides, AsymmetrySection, PenaltySection, RunConfig, SolverSection, TrainingSection, TspSection, VerifySection,
    ENV_PREFIX,
};
pub use rolling::{
    cmd_asymmetry, cmd_evaluate, cmd_train, parse_day, training_window, window_dates, Dataset, DayFailure, EvaluationOutcome,
    EvaluationRow, EvaluationSummary, FlaggedDay, MethodSummary, TrainOutcome, WeekTraining, EVALUATION_CSV, SUMMARY_JSON,
};
pub use verify::{
    bound_check, bound_fixtures, cmd_verify, kkt_suite, enumeration_config, verification_grid, BoundLine, KktFailure, KktSuite,
    EnumerationLine, VerifyReport, KKT_CORPUS_SIZE, KKT_TOLERANCE,
};

use chrono::NaiveDate;

use crate::data::DataError;
use crate::erm::ErmError;
use crate::eval::EvalError;
use crate::predictors::PredictorError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Erm(#[from] ErmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error("insufficient history for {target}: missing {}", join_dates(missing))]
    InsufficientHistory { target: NaiveDate, missing: Vec<NaiveDate> },
    #[error("no scenario days between {start} and {end}")]
    NoTargetDays { start: String, end: String },
}

fn join_dates(d: &[NaiveDate]) -> String {
    d.iter().map(NaiveDate::to_string).collect::<Vec<_>>().join(", ")
}

pub(crate) fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}
