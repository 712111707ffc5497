//! Power-system and scenario data: types, ingestion and validation.

mod network;
mod reserve;
mod scenario;
mod system;

pub use network::build_sensitivities;
pub use reserve::{rule_of_thumb_reserve, ReserveRequirement};
pub use scenario::{load_scenarios, read_scenarios, write_scenarios, Matrix, OperationScenario};
pub use system::{load_system, Branch, InitialStatus, PowerSystem, RenewableUnit, Segment, ThermalUnit};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("malformed system file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("negative or non-finite value: {0}")]
    Negative(String),
    #[error("{date}: hour {hour} is missing")]
    MissingHour { date: String, hour: usize },
    #[error("network error: {0}")]
    Network(String),
}
