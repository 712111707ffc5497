//! Per-day forecasts and realizations, read from a long-format CSV
//! (one row per date and hour).

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::reserve::{rule_of_thumb_reserve, ReserveRequirement};
use super::{DataError, PowerSystem};

/// Hour-major matrix: `m[t][k]`.
pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationScenario {
    pub id: String,
    pub raw_res_prediction: Matrix,
    pub raw_load_prediction: Matrix,
    pub actual_res: Matrix,
    pub actual_load: Matrix,
    pub raw_reserve: Vec<ReserveRequirement>,
}

impl OperationScenario {
    pub fn horizon(&self) -> usize {
        self.raw_res_prediction.len()
    }

    /// RES features: the raw per-unit prediction.
    pub fn features_res(&self) -> &Matrix {
        &self.raw_res_prediction
    }

    /// Reserve features per hour: (aggregate raw RES prediction, aggregate load prediction).
    pub fn features_reserve(&self) -> Vec<(f64, f64)> {
        self.raw_res_prediction
            .iter()
            .zip(&self.raw_load_prediction)
            .map(|(w, l)| (w.iter().sum(), l.iter().sum()))
            .collect()
    }

    pub fn total_load_prediction(&self) -> Vec<f64> {
        self.raw_load_prediction.iter().map(|r| r.iter().sum()).collect()
    }

    /// Checks dimensions against `system` and nonnegativity of every entry.
    pub fn validate(&self, system: &PowerSystem) -> Result<(), DataError> {
        let t = system.horizon();
        let dims = [
            ("raw RES prediction", &self.raw_res_prediction, system.num_res()),
            ("actual RES", &self.actual_res, system.num_res()),
            ("raw load prediction", &self.raw_load_prediction, system.num_loads()),
            ("actual load", &self.actual_load, system.num_loads()),
        ];
        for (what, m, cols) in dims {
            if m.len() != t || m.iter().any(|r| r.len() != cols) {
                return Err(DataError::Dimension(format!("{}: {what} must be {t}x{cols}", self.id)));
            }
            if m.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(DataError::Negative(format!("{}: {what}", self.id)));
            }
        }
        if self.raw_reserve.len() != t {
            return Err(DataError::Dimension(format!("{}: reserve must have {t} hours", self.id)));
        }
        if self.raw_reserve.iter().any(|r| !(r.sr >= 0.0 && r.nr >= 0.0)) {
            return Err(DataError::Negative(format!("{}: reserve requirement", self.id)));
        }
        Ok(())
    }
}

struct Columns {
    date: usize,
    hour: usize,
    res_pred: Vec<usize>,
    res_act: Vec<usize>,
    load_pred: Vec<usize>,
    load_act: Vec<usize>,
    reserve: Option<(usize, usize)>,
}

fn locate(headers: &csv::StringRecord, system: &PowerSystem) -> Result<Columns, DataError> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DataError::Dimension(format!("scenario file has no column `{name}`")))
    };
    let res = |suffix: &str| -> Result<Vec<usize>, DataError> {
        system.res_units.iter().map(|r| find(&format!("res_{}_{suffix}", r.id))).collect()
    };
    let load = |suffix: &str| -> Result<Vec<usize>, DataError> {
        system.load_buses.iter().map(|&q| find(&format!("load_{}_{suffix}", system.buses[q]))).collect()
    };
    let reserve = match (find("sr_req"), find("nr_req")) {
        (Ok(s), Ok(n)) => Some((s, n)),
        (Err(_), Err(_)) => None,
        _ => return Err(DataError::Dimension("sr_req and nr_req must appear together".into())),
    };
    let expected = 2 + 2 * system.num_res() + 2 * system.num_loads() + if reserve.is_some() { 2 } else { 0 };
    if headers.len() != expected {
        return Err(DataError::Dimension(format!(
            "scenario file has {} columns, the system needs {expected}",
            headers.len()
        )));
    }
    Ok(Columns {
        date: find("date")?,
        hour: find("hour")?,
        res_pred: res("pred")?,
        res_act: res("actual")?,
        load_pred: load("pred")?,
        load_act: load("actual")?,
        reserve,
    })
}

#[derive(Default)]
struct DayRows {
    hours: BTreeMap<usize, csv::StringRecord>,
}

fn number(rec: &csv::StringRecord, col: usize, date: &str, hour: usize) -> Result<f64, DataError> {
    let raw = rec.get(col).unwrap_or("").trim();
    let v: f64 = raw
        .parse()
        .map_err(|_| DataError::Parse(format!("{date} hour {hour}: `{raw}` is not a number")))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(DataError::Negative(format!("{date} hour {hour}: value {v}")));
    }
    Ok(v)
}

/// Parses scenario CSV text; reserve requirements missing from the file are
/// sized by the rule of thumb with fraction `alpha`.
pub fn read_scenarios<R: Read>(reader: R, system: &PowerSystem, alpha: f64) -> Result<Vec<OperationScenario>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = locate(&headers, system)?;
    let t = system.horizon();

    let mut order: Vec<String> = Vec::new();
    let mut days: BTreeMap<String, DayRows> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let date = rec.get(cols.date).unwrap_or("").to_string();
        let hour: usize = rec
            .get(cols.hour)
            .and_then(|h| h.parse().ok())
            .ok_or_else(|| DataError::Parse(format!("{date}: invalid hour field")))?;
        if hour < 1 || hour > t {
            return Err(DataError::Parse(format!("{date}: hour {hour} outside 1..={t}")));
        }
        let day = days.entry(date.clone()).or_insert_with(|| {
            order.push(date.clone());
            DayRows::default()
        });
        if day.hours.insert(hour, rec).is_some() {
            return Err(DataError::Parse(format!("{date}: hour {hour} appears twice")));
        }
    }

    let mut out = Vec::with_capacity(order.len());
    for date in order {
        let day = &days[&date];
        if let Some(h) = (1..=t).find(|h| !day.hours.contains_key(h)) {
            return Err(DataError::MissingHour { date, hour: h });
        }
        let grab = |idx: &[usize]| -> Result<Matrix, DataError> {
            (1..=t)
                .map(|h| idx.iter().map(|&c| number(&day.hours[&h], c, &date, h)).collect())
                .collect()
        };
        let raw_load_prediction = grab(&cols.load_pred)?;
        let raw_reserve = match cols.reserve {
            Some((s, n)) => (1..=t)
                .map(|h| {
                    let rec = &day.hours[&h];
                    Ok(ReserveRequirement { sr: number(rec, s, &date, h)?, nr: number(rec, n, &date, h)? })
                })
                .collect::<Result<_, DataError>>()?,
            None => rule_of_thumb_reserve(&raw_load_prediction, alpha)?,
        };
        let sc = OperationScenario {
            raw_res_prediction: grab(&cols.res_pred)?,
            actual_res: grab(&cols.res_act)?,
            actual_load: grab(&cols.load_act)?,
            raw_load_prediction,
            raw_reserve,
            id: date,
        };
        sc.validate(system)?;
        out.push(sc);
    }
    Ok(out)
}

pub fn load_scenarios(path: impl AsRef<Path>, system: &PowerSystem, alpha: f64) -> Result<Vec<OperationScenario>, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| DataError::Io(path.display().to_string(), e))?;
    read_scenarios(file, system, alpha)
}

/// Writes scenarios in the format accepted by [`read_scenarios`], including
/// the reserve columns.
pub fn write_scenarios<W: Write>(writer: W, system: &PowerSystem, scenarios: &[OperationScenario]) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string(), "hour".to_string()];
    for r in &system.res_units {
        header.push(format!("res_{}_pred", r.id));
        header.push(format!("res_{}_actual", r.id));
    }
    for &q in &system.load_buses {
        header.push(format!("load_{}_pred", system.buses[q]));
        header.push(format!("load_{}_actual", system.buses[q]));
    }
    header.push("sr_req".into());
    header.push("nr_req".into());
    w.write_record(&header)?;
    for sc in scenarios {
        sc.validate(system)?;
        for t in 0..sc.horizon() {
            let mut row = vec![sc.id.clone(), (t + 1).to_string()];
            for j in 0..system.num_res() {
                row.push(sc.raw_res_prediction[t][j].to_string());
                row.push(sc.actual_res[t][j].to_string());
            }
            for q in 0..system.num_loads() {
                row.push(sc.raw_load_prediction[t][q].to_string());
                row.push(sc.actual_load[t][q].to_string());
            }
            row.push(sc.raw_reserve[t].sr.to_string());
            row.push(sc.raw_reserve[t].nr.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| DataError::Io("scenario output".into(), e))?;
    Ok(())
}
