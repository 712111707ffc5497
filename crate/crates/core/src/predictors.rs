//! Affine RES and reserve predictors.
//!
//! RES: `ŵ◇[t][j] = m[t][j] · ŵ[t][j]`. Reserve: with two columns,
//! `ρ_t = n[t][0]·Σ_j ŵ[t][j] + n[t][1]·Σ_q l̂[t][q]` and SR = NR = ρ/2; with
//! four columns SR uses `n[t][0..2]` and NR uses `n[t][2..4]`.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::{Matrix, OperationScenario, ReserveRequirement};
use crate::milp::{LinExpr, LinearModel, VarId};

#[derive(Debug, thiserror::Error)]
pub enum PredictorError {
    #[error("cannot access {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("malformed predictor file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid predictor: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReserveMapping {
    /// One total requirement per hour, split evenly.
    #[default]
    Split,
    /// Separate SR and NR coefficient pairs.
    Independent,
}

impl ReserveMapping {
    pub fn columns(self) -> usize {
        match self {
            ReserveMapping::Split => 2,
            ReserveMapping::Independent => 4,
        }
    }

    fn from_columns(c: usize) -> Option<Self> {
        match c {
            2 => Some(ReserveMapping::Split),
            4 => Some(ReserveMapping::Independent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictorMetadata {
    #[serde(default)]
    pub training_days: Vec<String>,
    #[serde(default)]
    pub lambda_w: Option<f64>,
    #[serde(default)]
    pub lambda_r: Option<f64>,
    #[serde(default)]
    pub erm_objective: Option<f64>,
    #[serde(default)]
    pub converged: Option<bool>,
}

mod decimal {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        let text: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let text: Vec<Vec<String>> = Vec::deserialize(d)?;
        text.iter()
            .map(|r| {
                r.iter()
                    .map(|v| v.trim().parse::<f64>().map_err(|_| serde::de::Error::custom(format!("`{v}` is not a decimal"))))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePredictorPair {
    pub horizon: usize,
    pub res_count: usize,
    /// `[t][j]` RES multipliers.
    #[serde(with = "decimal")]
    pub m: Matrix,
    /// `[t][c]` reserve multipliers, two or four columns.
    #[serde(with = "decimal")]
    pub n: Matrix,
    #[serde(default)]
    pub metadata: PredictorMetadata,
}

impl AffinePredictorPair {
    /// `m = 1` and `n` reproducing the rule-of-thumb reserve with fraction `alpha`.
    pub fn identity(horizon: usize, res_count: usize, alpha: f64, mapping: ReserveMapping) -> Self {
        let row = match mapping {
            ReserveMapping::Split => vec![0.0, alpha],
            ReserveMapping::Independent => vec![0.0, alpha / 2.0, 0.0, alpha / 2.0],
        };
        AffinePredictorPair {
            horizon,
            res_count,
            m: vec![vec![1.0; res_count]; horizon],
            n: vec![row; horizon],
            metadata: PredictorMetadata::default(),
        }
    }

    pub fn zero(horizon: usize, res_count: usize, mapping: ReserveMapping) -> Self {
        AffinePredictorPair {
            horizon,
            res_count,
            m: vec![vec![0.0; res_count]; horizon],
            n: vec![vec![0.0; mapping.columns()]; horizon],
            metadata: PredictorMetadata::default(),
        }
    }

    pub fn mapping(&self) -> ReserveMapping {
        ReserveMapping::from_columns(self.n.first().map_or(2, Vec::len)).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), PredictorError> {
        if self.m.len() != self.horizon || self.m.iter().any(|r| r.len() != self.res_count) {
            return Err(PredictorError::Invalid(format!("m must be {}x{}", self.horizon, self.res_count)));
        }
        let cols = self.n.first().map_or(0, Vec::len);
        if self.n.len() != self.horizon || ReserveMapping::from_columns(cols).is_none() || self.n.iter().any(|r| r.len() != cols) {
            return Err(PredictorError::Invalid(format!("n must be {}x2 or {}x4", self.horizon, self.horizon)));
        }
        for (name, mat) in [("m", &self.m), ("n", &self.n)] {
            if let Some(v) = mat.iter().flatten().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(PredictorError::Invalid(format!("{name} has entry {v}; multipliers must be nonnegative")));
            }
        }
        Ok(())
    }

    pub fn predict_res(&self, features: &Matrix) -> Result<Matrix, PredictorError> {
        if features.len() != self.horizon || features.iter().any(|r| r.len() != self.res_count) {
            return Err(PredictorError::Invalid("RES features do not match the predictor shape".into()));
        }
        Ok(self.m.iter().zip(features).map(|(m, f)| m.iter().zip(f).map(|(a, b)| a * b).collect()).collect())
    }

    pub fn predict_reserve(&self, features: &[(f64, f64)]) -> Result<Vec<ReserveRequirement>, PredictorError> {
        if features.len() != self.horizon {
            return Err(PredictorError::Invalid("reserve features do not match the horizon".into()));
        }
        Ok(self
            .n
            .iter()
            .zip(features)
            .map(|(n, &(w, l))| match self.mapping() {
                ReserveMapping::Split => {
                    let rho = n[0] * w + n[1] * l;
                    ReserveRequirement { sr: rho / 2.0, nr: rho / 2.0 }
                }
                ReserveMapping::Independent => ReserveRequirement { sr: n[0] * w + n[1] * l, nr: n[2] * w + n[3] * l },
            })
            .collect())
    }

    /// Tailored RES and reserve predictions for one scenario.
    pub fn predict(&self, scenario: &OperationScenario) -> Result<(Matrix, Vec<ReserveRequirement>), PredictorError> {
        Ok((self.predict_res(scenario.features_res())?, self.predict_reserve(&scenario.features_reserve())?))
    }

    pub fn l1_res(&self) -> f64 {
        self.m.iter().flatten().sum()
    }

    pub fn l1_reserve(&self) -> f64 {
        self.n.iter().flatten().sum()
    }

    pub fn to_json_string(&self) -> Result<String, PredictorError> {
        self.validate()?;
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self, PredictorError> {
        let p: AffinePredictorPair = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PredictorError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()?).map_err(|e| PredictorError::Io(path.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PredictorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PredictorError::Io(path.display().to_string(), e))?;
        Self::from_json_str(&text)
    }
}

/// Which coefficients training may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TrainTarget {
    #[default]
    Both,
    /// `m` pinned to one.
    ReserveOnly,
    /// `n` pinned to the rule-of-thumb identity.
    ResOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorStructure {
    pub mapping: ReserveMapping,
    /// One multiplier shared by every RES entry.
    pub scalar_m: bool,
    pub target: TrainTarget,
    /// Optional upper bound on every multiplier.
    pub multiplier_cap: Option<f64>,
    /// Rule-of-thumb fraction used for pinned reserve coefficients.
    pub alpha: f64,
}

impl Default for PredictorStructure {
    fn default() -> Self {
        Self { mapping: ReserveMapping::Split, scalar_m: false, target: TrainTarget::Both, multiplier_cap: None, alpha: 0.5 }
    }
}

/// Predictor coefficients as columns of an optimization model.
#[derive(Debug, Clone)]
pub struct PredictorVars {
    pub m: Vec<Vec<VarId>>,
    pub n: Vec<Vec<VarId>>,
    pub mapping: ReserveMapping,
}

impl PredictorVars {
    pub fn add_to(model: &mut LinearModel, horizon: usize, res_count: usize, s: &PredictorStructure) -> Self {
        let cap = s.multiplier_cap.unwrap_or(f64::INFINITY);
        let identity = AffinePredictorPair::identity(horizon, res_count, s.alpha, s.mapping);
        let pin_m = s.target == TrainTarget::ReserveOnly;
        let pin_n = s.target == TrainTarget::ResOnly;
        let m = if s.scalar_m {
            let v = if pin_m { model.continuous("m", 1.0, 1.0) } else { model.continuous("m", 0.0, cap) };
            vec![vec![v; res_count]; horizon]
        } else {
            (0..horizon)
                .map(|t| {
                    (0..res_count)
                        .map(|j| {
                            let name = format!("m[{},{}]", t + 1, j + 1);
                            if pin_m {
                                model.continuous(name, 1.0, 1.0)
                            } else {
                                model.continuous(name, 0.0, cap)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let n = (0..horizon)
            .map(|t| {
                (0..s.mapping.columns())
                    .map(|c| {
                        let name = format!("n[{},{}]", t + 1, c + 1);
                        if pin_n {
                            let v = identity.n[t][c];
                            model.continuous(name, v, v)
                        } else {
                            model.continuous(name, 0.0, cap)
                        }
                    })
                    .collect()
            })
            .collect();
        PredictorVars { m, n, mapping: s.mapping }
    }

    /// `m ∘ features` as expressions.
    pub fn res_cap(&self, features: &Matrix) -> Vec<Vec<LinExpr>> {
        self.m
            .iter()
            .zip(features)
            .map(|(m, f)| m.iter().zip(f).map(|(&v, &x)| LinExpr::term(v, x)).collect())
            .collect()
    }

    /// Hourly (SR, NR) requirement expressions.
    pub fn reserve(&self, features: &[(f64, f64)]) -> (Vec<LinExpr>, Vec<LinExpr>) {
        self.n
            .iter()
            .zip(features)
            .map(|(n, &(w, l))| match self.mapping {
                ReserveMapping::Split => {
                    let half = LinExpr::term(n[0], 0.5 * w) + LinExpr::term(n[1], 0.5 * l);
                    (half.clone(), half)
                }
                ReserveMapping::Independent => {
                    (LinExpr::term(n[0], w) + LinExpr::term(n[1], l), LinExpr::term(n[2], w) + LinExpr::term(n[3], l))
                }
            })
            .unzip()
    }

    /// `Σ m` over all entries.
    pub fn l1_res(&self) -> LinExpr {
        LinExpr::sum(self.m.iter().flatten().copied())
    }

    pub fn l1_reserve(&self) -> LinExpr {
        LinExpr::sum(self.n.iter().flatten().copied())
    }

    /// Distinct coefficient columns (shared scalar `m` listed once).
    pub fn columns(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = self.m.iter().flatten().chain(self.n.iter().flatten()).copied().collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn read(&self, values: &[f64]) -> AffinePredictorPair {
        let get = |m: &[Vec<VarId>]| -> Matrix { m.iter().map(|r| r.iter().map(|v| values[v.0].max(0.0)).collect()).collect() };
        AffinePredictorPair {
            horizon: self.m.len(),
            res_count: self.m.first().map_or(0, Vec::len),
            m: get(&self.m),
            n: get(&self.n),
            metadata: PredictorMetadata::default(),
        }
    }
}
