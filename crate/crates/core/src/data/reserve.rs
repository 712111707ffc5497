use serde::{Deserialize, Serialize};

use super::DataError;

/// Hourly spinning / non-spinning requirement in MW.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReserveRequirement {
    pub sr: f64,
    pub nr: f64,
}

impl ReserveRequirement {
    pub fn total(&self) -> f64 {
        self.sr + self.nr
    }
}

/// Total reserve `alpha * load`, half spinning and half non-spinning.
pub fn rule_of_thumb_reserve(load_forecast: &[Vec<f64>], alpha: f64) -> Result<Vec<ReserveRequirement>, DataError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(DataError::Validation(format!("reserve fraction alpha = {alpha} must lie in [0, 1]")));
    }
    Ok(load_forecast
        .iter()
        .map(|row| {
            let half = 0.5 * alpha * row.iter().sum::<f64>();
            ReserveRequirement { sr: half, nr: half }
        })
        .collect())
}
