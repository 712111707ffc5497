use serde::{Deserialize, Serialize};

use crate::data::Matrix;

use super::EvalError;

/// Realizations at or below this many MW are left out of percentage errors.
pub const PERCENT_THRESHOLD_MW: f64 = 1.0;

fn nonzero(v: f64, metric: &'static str) -> Result<f64, EvalError> {
    if v == 0.0 || !v.is_finite() {
        Err(EvalError::ZeroDenominator { metric })
    } else {
        Ok(v)
    }
}

/// Economics improvement over the open-loop cost, in percent.
pub fn metric_ei(c_opo: f64, c_cpo: f64) -> Result<f64, EvalError> {
    Ok((c_opo - c_cpo) / nonzero(c_opo, "EI")? * 100.0)
}

/// Share of the open-loop to perfect-information cost gap that is closed.
pub fn metric_voi(c_opo: f64, c_cpo: f64, c_ppo: f64) -> Result<f64, EvalError> {
    Ok((c_opo - c_cpo) / nonzero(c_opo - c_ppo, "VoI")?)
}

/// Relative cost of imperfect predictions, in percent.
pub fn metric_loss(c_hat: f64, c_tilde: f64) -> Result<f64, EvalError> {
    Ok((c_hat - c_tilde) / nonzero(c_tilde, "Loss")? * 100.0)
}

/// Point-forecast accuracy. Percentages are `None` when no realization
/// exceeds [`PERCENT_THRESHOLD_MW`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsMetrics {
    pub mae: f64,
    pub rmse: f64,
    pub mape: Option<f64>,
    /// Over-predicted share of MAPE; `mope + mupe == mape`.
    pub mope: Option<f64>,
    pub mupe: Option<f64>,
}

pub fn stats_metrics(prediction: &Matrix, actual: &Matrix) -> Result<StatsMetrics, EvalError> {
    let same = prediction.len() == actual.len() && prediction.iter().zip(actual).all(|(a, b)| a.len() == b.len());
    if !same {
        return Err(EvalError::Invalid("prediction and realization differ in shape".into()));
    }
    let pairs: Vec<(f64, f64)> =
        prediction.iter().flatten().copied().zip(actual.iter().flatten().copied()).collect();
    if pairs.is_empty() {
        return Err(EvalError::Invalid("no entries to compare".into()));
    }
    let n = pairs.len() as f64;
    let mae = pairs.iter().map(|(p, a)| (p - a).abs()).sum::<f64>() / n;
    let rmse = (pairs.iter().map(|(p, a)| (p - a).powi(2)).sum::<f64>() / n).sqrt();

    let counted: Vec<&(f64, f64)> = pairs.iter().filter(|(_, a)| *a > PERCENT_THRESHOLD_MW).collect();
    let (mape, mope, mupe) = if counted.is_empty() {
        (None, None, None)
    } else {
        let k = counted.len() as f64;
        let share = |keep: &dyn Fn(f64) -> bool| {
            100.0 * counted.iter().filter(|(p, a)| keep(p - a)).map(|(p, a)| (p - a).abs() / a).sum::<f64>() / k
        };
        let over = share(&|e| e > 0.0);
        let under = share(&|e| e < 0.0);
        (Some(over + under), Some(over), Some(under))
    };
    Ok(StatsMetrics { mae, rmse, mape, mope, mupe })
}
