//! Static grid description and its JSON form.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::build_sensitivities;
use super::DataError;

/// Tolerance for the segment-width sum check.
const WIDTH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub width_mw: f64,
    pub cost_per_mwh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialStatus {
    pub committed: bool,
    pub output_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalUnit {
    pub id: String,
    pub bus: usize,
    pub quick_start: bool,
    pub p_min: f64,
    pub p_max: f64,
    pub segments: Vec<Segment>,
    pub startup_cost: f64,
    pub noload_cost: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub startup_ramp: f64,
    pub shutdown_ramp: f64,
    pub min_up: usize,
    pub min_down: usize,
    pub sr_max: f64,
    pub nr_max: f64,
    pub initial_status: InitialStatus,
}

impl ThermalUnit {
    fn validate(&self, n_buses: usize) -> Result<(), String> {
        let id = &self.id;
        if self.bus >= n_buses {
            return Err(format!("unit {id}: bus {} does not exist", self.bus));
        }
        let nonneg = [
            ("p_min", self.p_min),
            ("startup_cost", self.startup_cost),
            ("noload_cost", self.noload_cost),
            ("ramp_up", self.ramp_up),
            ("ramp_down", self.ramp_down),
            ("startup_ramp", self.startup_ramp),
            ("shutdown_ramp", self.shutdown_ramp),
            ("sr_max", self.sr_max),
            ("nr_max", self.nr_max),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("unit {id}: {name} must be a finite nonnegative number, got {v}"));
            }
        }
        if !(self.p_max.is_finite() && self.p_max >= self.p_min) {
            return Err(format!("unit {id}: p_max {} is below p_min {}", self.p_max, self.p_min));
        }
        if self.segments.is_empty() {
            return Err(format!("unit {id}: at least one cost segment is required"));
        }
        for (k, s) in self.segments.iter().enumerate() {
            if !(s.width_mw.is_finite() && s.width_mw >= 0.0 && s.cost_per_mwh.is_finite()) {
                return Err(format!("unit {id}: segment {k} has an invalid width or cost"));
            }
        }
        let width: f64 = self.segments.iter().map(|s| s.width_mw).sum();
        if (width - self.p_max).abs() > WIDTH_TOL * self.p_max.max(1.0) {
            return Err(format!("unit {id}: segment widths sum to {width} but p_max is {}", self.p_max));
        }
        if self.segments.windows(2).any(|w| w[1].cost_per_mwh < w[0].cost_per_mwh) {
            return Err(format!("unit {id}: segment costs must be nondecreasing"));
        }
        if self.min_up < 1 || self.min_down < 1 {
            return Err(format!("unit {id}: min_up and min_down must be at least 1"));
        }
        let init = self.initial_status;
        if init.committed {
            if init.output_mw < self.p_min - WIDTH_TOL || init.output_mw > self.p_max + WIDTH_TOL {
                return Err(format!("unit {id}: initial output {} outside [p_min, p_max]", init.output_mw));
            }
        } else if init.output_mw != 0.0 {
            return Err(format!("unit {id}: initial output must be 0 when not committed"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewableUnit {
    pub id: String,
    pub bus: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: String,
    pub from_bus: usize,
    pub to_bus: usize,
    pub capacity_mw: f64,
    pub reactance: f64,
    /// Flow on this branch per MW injected at each bus (withdrawn at the reference bus).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity_row: Option<Vec<f64>>,
}

impl Branch {
    pub fn sensitivity(&self) -> &[f64] {
        self.sensitivity_row.as_deref().unwrap_or(&[])
    }
}

fn default_horizon() -> usize {
    24
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSystem {
    pub buses: Vec<String>,
    pub thermal_units: Vec<ThermalUnit>,
    #[serde(default)]
    pub res_units: Vec<RenewableUnit>,
    #[serde(default)]
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub load_buses: Vec<usize>,
    #[serde(default = "default_horizon")]
    pub horizon_hours: usize,
}

impl PowerSystem {
    pub fn horizon(&self) -> usize {
        self.horizon_hours
    }

    pub fn num_units(&self) -> usize {
        self.thermal_units.len()
    }

    pub fn num_res(&self) -> usize {
        self.res_units.len()
    }

    pub fn num_loads(&self) -> usize {
        self.load_buses.len()
    }

    /// Largest segment count over all units.
    pub fn max_segments(&self) -> usize {
        self.thermal_units.iter().map(|u| u.segments.len()).max().unwrap_or(0)
    }

    pub fn has_sensitivities(&self) -> bool {
        self.branches.iter().all(|b| b.sensitivity_row.is_some())
    }

    /// Checks every structural invariant, reporting the first violation.
    pub fn validate(&self) -> Result<(), DataError> {
        self.check().map_err(DataError::Validation)
    }

    fn check(&self) -> Result<(), String> {
        let nb = self.buses.len();
        if nb == 0 {
            return Err("system has no buses".into());
        }
        let mut names = HashSet::new();
        for b in &self.buses {
            if !names.insert(b.as_str()) {
                return Err(format!("duplicate bus name {b}"));
            }
        }
        if self.thermal_units.is_empty() {
            return Err("system needs at least one thermal unit".into());
        }
        if self.horizon_hours < 1 {
            return Err("horizon_hours must be at least 1".into());
        }
        let mut ids = HashSet::new();
        for u in &self.thermal_units {
            if !ids.insert(u.id.as_str()) {
                return Err(format!("duplicate thermal unit id {}", u.id));
            }
            u.validate(nb)?;
        }
        let mut ids = HashSet::new();
        for r in &self.res_units {
            if !ids.insert(r.id.as_str()) {
                return Err(format!("duplicate RES unit id {}", r.id));
            }
            if r.bus >= nb {
                return Err(format!("RES unit {}: bus {} does not exist", r.id, r.bus));
            }
        }
        let mut ids = HashSet::new();
        for br in &self.branches {
            if !ids.insert(br.id.as_str()) {
                return Err(format!("duplicate branch id {}", br.id));
            }
            if br.from_bus >= nb || br.to_bus >= nb || br.from_bus == br.to_bus {
                return Err(format!("branch {}: invalid endpoints {} -> {}", br.id, br.from_bus, br.to_bus));
            }
            if !(br.capacity_mw.is_finite() && br.capacity_mw > 0.0) {
                return Err(format!("branch {}: capacity_mw must be positive", br.id));
            }
            if !(br.reactance.is_finite() && br.reactance > 0.0) {
                return Err(format!("branch {}: reactance must be positive", br.id));
            }
            if let Some(row) = &br.sensitivity_row {
                if row.len() != nb {
                    return Err(format!("branch {}: sensitivity row has {} entries for {nb} buses", br.id, row.len()));
                }
            }
        }
        let mut seen = HashSet::new();
        for &q in &self.load_buses {
            if q >= nb {
                return Err(format!("load bus {q} does not exist"));
            }
            if !seen.insert(q) {
                return Err(format!("load bus {q} listed twice"));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, DataError> {
        let sys: PowerSystem = serde_json::from_str(text)?;
        sys.validate()?;
        if sys.has_sensitivities() {
            Ok(sys)
        } else {
            build_sensitivities(&sys, 0)
        }
    }

    pub fn to_json_string(&self) -> Result<String, DataError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Reads, validates and completes (sensitivities w.r.t. bus 0) a system file.
pub fn load_system(path: impl AsRef<Path>) -> Result<PowerSystem, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DataError::Io(path.display().to_string(), e))?;
    PowerSystem::from_json_str(&text)
}
