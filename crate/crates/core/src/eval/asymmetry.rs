use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{OperationScenario, PowerSystem};
use crate::milp::SolveOptions;
use crate::ops::{run_with_predictions, Penalties};

use super::metrics::{metric_loss, stats_metrics};
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryPoint {
    /// Requested relative error; positive over-predicts.
    pub error: f64,
    /// MAPE of the perturbed prediction carrying the sign of `error`.
    pub signed_mape: f64,
    pub actual_cost: f64,
    pub loss: f64,
}

/// Least-squares slope of loss on |MAPE| through the origin for one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub points: usize,
    pub slope: f64,
    /// Loss never decreases as the error grows.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryTable {
    /// Cost with the realization as prediction.
    pub perfect_cost: f64,
    pub points: Vec<AsymmetryPoint>,
    pub over: BranchSummary,
    pub under: BranchSummary,
}

impl AsymmetryTable {
    /// The point for requested error `e`, if it was on the grid.
    pub fn at(&self, e: f64) -> Option<&AsymmetryPoint> {
        self.points.iter().find(|p| (p.error - e).abs() < 1e-12)
    }
}

fn branch(points: &[&AsymmetryPoint]) -> BranchSummary {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.error.abs().total_cmp(&b.error.abs()));
    let sxx: f64 = sorted.iter().map(|p| p.signed_mape.powi(2)).sum();
    let sxy: f64 = sorted.iter().map(|p| p.signed_mape.abs() * p.loss).sum();
    let monotone = sorted.windows(2).all(|w| w[1].loss >= w[0].loss - 1e-9 * w[0].loss.abs().max(1.0));
    BranchSummary { points: sorted.len(), slope: if sxx > 0.0 { sxy / sxx } else { 0.0 }, monotone }
}

/// Perturbs the RES prediction to `w̃ (1 + e f)` for every `e` in `grid`,
/// runs the open-loop pipeline and reports the loss against the perfect
/// prediction. `f` is a seeded per-entry factor in [0.5, 1.5] rescaled to
/// mean one; the same factors serve every grid point.
pub fn asymmetry_experiment(
    system: &PowerSystem,
    base: &OperationScenario,
    grid: &[f64],
    seed: u64,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<AsymmetryTable, EvalError> {
    base.validate(system)?;
    if base.actual_res.iter().flatten().sum::<f64>() <= 0.0 {
        return Err(EvalError::Invalid("the base scenario needs positive RES realizations".into()));
    }
    if grid.iter().any(|e| !e.is_finite()) {
        return Err(EvalError::Invalid("error grid must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Vec<f64>> =
        base.actual_res.iter().map(|r| r.iter().map(|_| rng.gen_range(0.5..1.5)).collect()).collect();
    let mean = raw.iter().flatten().sum::<f64>() / raw.iter().flatten().count() as f64;
    let factor: Vec<Vec<f64>> = raw.iter().map(|r| r.iter().map(|f| f / mean).collect()).collect();

    let reserve = &base.raw_reserve;
    let perfect_cost = run_with_predictions(system, base, &base.actual_res, reserve, penalties, opts)?.report.total();
    let mut points = Vec::with_capacity(grid.len());
    for &e in grid {
        let res: Vec<Vec<f64>> = base
            .actual_res
            .iter()
            .zip(&factor)
            .map(|(w, f)| w.iter().zip(f).map(|(w, f)| (w * (1.0 + e * f)).max(0.0)).collect())
            .collect();
        let cost = run_with_predictions(system, base, &res, reserve, penalties, opts)?.report.total();
        let mape = stats_metrics(&res, &base.actual_res)?.mape.unwrap_or(0.0);
        points.push(AsymmetryPoint {
            error: e,
            signed_mape: if e < 0.0 { -mape } else { mape },
            actual_cost: cost,
            loss: metric_loss(cost, perfect_cost)?,
        });
    }
    let over: Vec<&AsymmetryPoint> = points.iter().filter(|p| p.error > 0.0).collect();
    let under: Vec<&AsymmetryPoint> = points.iter().filter(|p| p.error < 0.0).collect();
    Ok(AsymmetryTable { perfect_cost, over: branch(&over), under: branch(&under), points })
}

pub fn write_asymmetry_csv<W: Write>(out: W, table: &AsymmetryTable) -> Result<(), EvalError> {
    let io = |e: csv::Error| EvalError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["error", "signed_mape", "actual_cost", "loss"]).map_err(io)?;
    for p in &table.points {
        w.write_record([
            format!("{:.6}", p.error),
            format!("{:.6}", p.signed_mape),
            format!("{:.6}", p.actual_cost),
            format!("{:.6}", p.loss),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| EvalError::Io(e.to_string()))
}
