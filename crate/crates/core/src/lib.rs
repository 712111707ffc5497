pub mod data;
pub mod erm;
pub mod eval;
pub mod fixtures;
pub mod harness;
pub mod milp;
pub mod ops;
pub mod predictors;
