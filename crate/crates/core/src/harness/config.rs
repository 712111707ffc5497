use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::erm::{TrainingConfig, DEFAULT_LAMBDA};
use crate::eval::Method;
use crate::milp::{SolveOptions, DEFAULT_BIG_M};
use crate::ops::{Penalties, DEFAULT_PENALTY};
use crate::predictors::{PredictorStructure, ReserveMapping, TrainTarget};

use super::HarnessError;

/// Prefix of environment variables that override configuration keys.
/// `COPO_SEED=3` sets `seed`; `COPO_SOLVER__GAP=0.02` sets `solver.gap`.
pub const ENV_PREFIX: &str = "COPO_";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltySection {
    pub shortfall: f64,
    pub surplus: f64,
    pub flow: f64,
}

impl Default for PenaltySection {
    fn default() -> Self {
        Self { shortfall: DEFAULT_PENALTY, surplus: DEFAULT_PENALTY, flow: DEFAULT_PENALTY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub gap: f64,
    /// Seconds per solve.
    pub time_limit: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { gap: 0.01, time_limit: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub max_iterations: usize,
    /// Relative gap at which training stops; `None` uses `solver.gap`.
    pub gap_target: Option<f64>,
    pub big_m: f64,
    pub sp2_tolerance: Option<f64>,
    pub scalar_m: bool,
    pub multiplier_cap: Option<f64>,
    /// `split` (one total, halved) or `independent` (separate SR and NR).
    pub mapping: ReserveMapping,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            max_iterations: 30,
            gap_target: None,
            big_m: DEFAULT_BIG_M,
            sp2_tolerance: None,
            scalar_m: false,
            multiplier_cap: None,
            mapping: ReserveMapping::Split,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TspSection {
    /// Latin hypercube draws before reduction.
    pub samples: usize,
    /// Empirical error quantiles spanning the sampling box.
    pub lower_quantile: f64,
    pub upper_quantile: f64,
}

impl Default for TspSection {
    fn default() -> Self {
        Self { samples: 3000, lower_quantile: 0.05, upper_quantile: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Big-M used by the KKT-equivalence suite.
    pub big_m: f64,
    /// Optional instance checked in place of the shipped tiny instances.
    pub system: Option<PathBuf>,
    pub scenarios: Option<PathBuf>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { big_m: DEFAULT_BIG_M, system: None, scenarios: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymmetrySection {
    /// Scenario day perturbed; `None` takes the first day in the file.
    pub day: Option<String>,
    /// Relative RES errors; positive over-predicts.
    pub errors: Vec<f64>,
}

impl Default for AsymmetrySection {
    fn default() -> Self {
        Self { day: None, errors: vec![-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3] }
    }
}

/// Run configuration. Relative paths resolve against the directory of the
/// file they were read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<PathBuf>,
    pub scenarios: Option<PathBuf>,
    /// First and last target day, inclusive; open ends take the data range.
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    /// NT: days of history each predictor is trained on.
    pub training_days: usize,
    pub alpha: f64,
    pub lambda_w: f64,
    pub lambda_r: f64,
    pub seed: u64,
    /// Method tags; `C-PO`, `C-PO-R` and `C-PO-W` take `training_days`.
    pub methods: Vec<String>,
    pub out: PathBuf,
    /// Day-level evaluation threads; `None` uses all cores.
    pub workers: Option<usize>,
    /// Train weekdays and weekends on separate histories.
    pub weekday_split: bool,
    /// Use the identity predictors instead of training.
    pub force_identity: bool,
    pub penalties: PenaltySection,
    pub solver: SolverSection,
    pub training: TrainingSection,
    pub tsp: TspSection,
    pub verify: VerifySection,
    pub asymmetry: AsymmetrySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: None,
            scenarios: None,
            start: None,
            end: None,
            training_days: 7,
            alpha: 0.5,
            lambda_w: DEFAULT_LAMBDA,
            lambda_r: DEFAULT_LAMBDA,
            seed: 0,
            methods: vec!["O-PO".into(), "P-PO".into(), "C-PO".into()],
            out: PathBuf::from("out"),
            workers: None,
            weekday_split: false,
            force_identity: false,
            penalties: PenaltySection::default(),
            solver: SolverSection::default(),
            training: TrainingSection::default(),
            tsp: TspSection::default(),
            verify: VerifySection::default(),
            asymmetry: AsymmetrySection::default(),
        }
    }
}

fn scalar_literal(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `COPO_`-prefixed overrides to a parsed table. Double underscores
/// separate sections; values parse as TOML literals and fall back to strings.
pub fn apply_overrides<I, K, V>(table: &mut toml::Table, vars: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    for (key, value) in vars {
        let Some(rest) = key.as_ref().strip_prefix(ENV_PREFIX) else { continue };
        let path: Vec<String> = rest.split("__").map(str::to_ascii_lowercase).collect();
        if path.iter().any(String::is_empty) {
            return Err(HarnessError::Config(format!("malformed override `{}`", key.as_ref())));
        }
        let (leaf, sections) = path.split_last().expect("split yields one element");
        let mut node = &mut *table;
        for s in sections {
            let entry = node.entry(s.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            node = entry
                .as_table_mut()
                .ok_or_else(|| HarnessError::Config(format!("override `{}`: `{s}` is not a section", key.as_ref())))?;
        }
        node.insert(leaf.clone(), scalar_literal(value.as_ref()));
    }
    Ok(())
}

impl RunConfig {
    /// Parses TOML text, applies `vars` as overrides and resolves relative
    /// paths against `base`.
    pub fn from_toml_str<I, K, V>(text: &str, vars: I, base: &Path) -> Result<Self, HarnessError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        apply_overrides(&mut table, vars)?;
        let mut cfg: RunConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (or defaults when `None`) with overrides from the process
    /// environment.
    pub fn load(path: Option<&Path>) -> Result<Self, HarnessError> {
        let (text, base) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))?;
                (text, p.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (String::new(), PathBuf::new()),
        };
        Self::from_toml_str(&text, std::env::vars(), &base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !base.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.system, &mut self.scenarios, &mut self.verify.system, &mut self.verify.scenarios]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.out);
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.training_days < 1 {
            return bad("training_days must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} must lie in [0, 1]", self.alpha));
        }
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if e < s {
                return bad(format!("end {e} precedes start {s}"));
            }
        }
        if !(self.solver.gap >= 0.0) {
            return bad("solver.gap must be nonnegative".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        let q = (self.tsp.lower_quantile, self.tsp.upper_quantile);
        if !(0.0 <= q.0 && q.0 <= q.1 && q.1 <= 1.0) {
            return bad("tsp quantiles must satisfy 0 <= lower <= upper <= 1".into());
        }
        self.method_list()?;
        Ok(())
    }

    /// Parsed method list, in configuration order without repeats.
    pub fn method_list(&self) -> Result<Vec<Method>, HarnessError> {
        let mut out = Vec::new();
        for tag in &self.methods {
            let t = tag.trim().to_ascii_uppercase();
            let expanded = match t.as_str() {
                "C-PO" => format!("C-PO-{}", self.training_days),
                "C-PO-R" | "C-PO-W" => format!("C-PO-{}{}", self.training_days, &t[4..]),
                _ => t,
            };
            let m: Method = expanded.parse().map_err(|e| HarnessError::Config(format!("{e}")))?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }

    pub fn penalties(&self) -> Penalties {
        Penalties { shortfall: self.penalties.shortfall, surplus: self.penalties.surplus, flow: self.penalties.flow }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { gap: self.solver.gap, time_limit: self.solver.time_limit, seed: (self.seed & 0x7fff_ffff) as u32 }
    }

    /// Trainer settings for `days` with `target` free.
    pub fn training_config(&self, days: Vec<crate::data::OperationScenario>, target: TrainTarget) -> TrainingConfig {
        let mut c = TrainingConfig::new(days);
        c.structure = PredictorStructure {
            mapping: self.training.mapping,
            scalar_m: self.training.scalar_m,
            target,
            multiplier_cap: self.training.multiplier_cap,
            alpha: self.alpha,
        };
        c.lambda_w = self.lambda_w;
        c.lambda_r = self.lambda_r;
        c.gap_target = self.training.gap_target.unwrap_or(self.solver.gap);
        c.max_iterations = self.training.max_iterations;
        c.big_m_primal = self.training.big_m;
        c.big_m_dual = self.training.big_m;
        c.solver = self.solve_options();
        c.sp2_tolerance = self.training.sp2_tolerance;
        c.penalties = self.penalties();
        c
    }
}
