//! Mixed-integer linear modelling layer and solver bindings.

mod corpus;
mod fix;
mod kkt;
mod lp_format;
mod model;
mod solver;

pub use corpus::{big_m_sentinel_lp, kkt_equivalence, random_lp, KktCheck};
pub use fix::{fix_binaries, fold_singletons, integer_assignment, FixedLp};
pub use kkt::{
    derive_kkt, BindingBigM, ComplementarityPair, KktOptions, KktSystem, RowOrigin, BIG_M_BINDING_TOL, DEFAULT_BIG_M,
};
pub use lp_format::to_lp_string;
pub use model::{Constraint, LinExpr, LinearModel, ModelStats, Sense, VarId, VarKind, Variable};
pub use solver::{
    backend_by_name, solve, HighsBackend, LpDuals, SolveOptions, SolveResult, SolveStatus, SolverBackend,
    FEASIBILITY_TOL,
};

#[derive(Debug, thiserror::Error)]
pub enum MilpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("{what} was not solved to optimality (status {status:?})")]
    NotSolved { what: String, status: SolveStatus },
    #[error("unknown solver backend `{0}`")]
    UnknownBackend(String),
    #[error("solver backend failure: {0}")]
    Backend(String),
    #[error("KKT derivation needs a pure LP but `{0}` is integer")]
    NotAnLp(String),
}
