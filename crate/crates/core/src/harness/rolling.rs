use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::data::{load_scenarios, load_system, Matrix, OperationScenario, PowerSystem};
use crate::erm::{train, write_training_log, CcgState, TrainingStatus};
use crate::eval::{
    asymmetry_experiment, generate_scenarios, metric_ei, metric_voi, perfect_information_excess, reduce_scenarios,
    run_open_loop_record, run_perfect, run_prescriptive_uc, run_tsp, write_asymmetry_csv, AsymmetryTable, CPoVariant,
    EvaluationRecord, Method, ScenarioBounds, UncertaintyScenarioSet,
};
use crate::ops::CostReport;
use crate::predictors::{AffinePredictorPair, TrainTarget};

use super::{io_err, HarnessError, RunConfig};

pub const EVALUATION_CSV: &str = "evaluation.csv";
pub const SUMMARY_JSON: &str = "summary.json";

pub fn parse_day(id: &str) -> Result<NaiveDate, HarnessError> {
    NaiveDate::parse_from_str(id.trim(), "%Y-%m-%d")
        .map_err(|_| HarnessError::Config(format!("scenario id `{id}` is not a YYYY-MM-DD date")))
}

/// A system with its scenario days keyed by calendar date.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub system: PowerSystem,
    pub days: BTreeMap<NaiveDate, OperationScenario>,
}

impl Dataset {
    pub fn new(system: PowerSystem, scenarios: Vec<OperationScenario>) -> Result<Self, HarnessError> {
        let mut days = BTreeMap::new();
        for s in scenarios {
            s.validate(&system)?;
            let d = parse_day(&s.id)?;
            if days.insert(d, s).is_some() {
                return Err(HarnessError::Config(format!("day {d} appears twice")));
            }
        }
        Ok(Dataset { system, days })
    }

    pub fn load(cfg: &RunConfig) -> Result<Self, HarnessError> {
        let (system, scenarios) = load_inputs(cfg)?;
        Self::new(system, scenarios)
    }
}

fn load_inputs(cfg: &RunConfig) -> Result<(PowerSystem, Vec<OperationScenario>), HarnessError> {
    let need = |p: &Option<PathBuf>, key: &str| p.clone().ok_or_else(|| HarnessError::Config(format!("`{key}` is not set")));
    let system = load_system(need(&cfg.system, "system")?)?;
    let scenarios = load_scenarios(need(&cfg.scenarios, "scenarios")?, &system, cfg.alpha)?;
    Ok((system, scenarios))
}

fn is_weekend(d: NaiveDate) -> bool {
    matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

/// The `nt` calendar days before `target`, ascending. With `weekday_split`
/// only days of the target's class (weekday or weekend) count.
pub fn window_dates(target: NaiveDate, nt: usize, weekday_split: bool) -> Vec<NaiveDate> {
    let mut out: Vec<NaiveDate> = (1..)
        .map(|k| target - Duration::days(k))
        .filter(|d| !weekday_split || is_weekend(*d) == is_weekend(target))
        .take(nt)
        .collect();
    out.reverse();
    out
}

/// Scenarios of the training window for `target`; every window date must be
/// present.
pub fn training_window(ds: &Dataset, target: NaiveDate, nt: usize, weekday_split: bool) -> Result<Vec<OperationScenario>, HarnessError> {
    let dates = window_dates(target, nt, weekday_split);
    let missing: Vec<NaiveDate> = dates.iter().filter(|d| !ds.days.contains_key(d)).copied().collect();
    if !missing.is_empty() {
        return Err(HarnessError::InsufficientHistory { target, missing });
    }
    Ok(dates.iter().map(|d| ds.days[d].clone()).collect())
}

fn train_target(variant: CPoVariant) -> TrainTarget {
    match variant {
        CPoVariant::Both => TrainTarget::Both,
        CPoVariant::ReserveOnly => TrainTarget::ReserveOnly,
        CPoVariant::ResOnly => TrainTarget::ResOnly,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn training_log_bytes(state: &CcgState) -> Result<Vec<u8>, HarnessError> {
    let mut buf = Vec::new();
    write_training_log(&mut buf, &state.log)?;
    Ok(buf)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub target: NaiveDate,
    pub days: Vec<String>,
    pub pair: AffinePredictorPair,
    pub state: CcgState,
    pub predictor_path: PathBuf,
    pub log_path: PathBuf,
}

/// Trains on the `training_days` days before `target` (default: `start`,
/// else the day after the data) and writes `predictor.json` and
/// `training_log.csv` to the output directory.
pub fn cmd_train(cfg: &RunConfig, target: Option<NaiveDate>) -> Result<TrainOutcome, HarnessError> {
    let ds = Dataset::load(cfg)?;
    train_on(cfg, &ds, target)
}

pub(crate) fn train_on(cfg: &RunConfig, ds: &Dataset, target: Option<NaiveDate>) -> Result<TrainOutcome, HarnessError> {
    let target = match target.or(cfg.start) {
        Some(t) => t,
        None => *ds.days.keys().next_back().ok_or_else(|| HarnessError::Config("the scenario file has no days".into()))? + Duration::days(1),
    };
    let window = training_window(ds, target, cfg.training_days, cfg.weekday_split)?;
    let days: Vec<String> = window.iter().map(|s| s.id.clone()).collect();
    log::info!("training for {target} on {} days: {}", days.len(), days.join(", "));
    let (pair, state) = train(&ds.system, &cfg.training_config(window, TrainTarget::Both))?;
    let predictor_path = cfg.out.join("predictor.json");
    let log_path = cfg.out.join("training_log.csv");
    write_file(&predictor_path, pair.to_json_string()?.as_bytes())?;
    write_file(&log_path, &training_log_bytes(&state)?)?;
    Ok(TrainOutcome { target, days, pair, state, predictor_path, log_path })
}

/// One evaluated method-day with its economic metrics.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationRow {
    pub record: EvaluationRecord,
    /// Against the same day's O-PO cost, percent.
    pub ei: Option<f64>,
    /// Needs O-PO and P-PO on the same day.
    pub voi: Option<f64>,
    /// SHA-256 of every input the record depends on.
    pub input_hash: String,
    /// History days that shaped the predictor or the scenario band.
    pub history: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DayFailure {
    pub day: String,
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeekTraining {
    pub week_start: NaiveDate,
    pub method: Method,
    pub days: Vec<String>,
    pub status: Option<TrainingStatus>,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub days: usize,
    pub average_cost: f64,
    /// From average costs over the days both this method and O-PO ran.
    pub ei: Option<f64>,
    pub voi: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlaggedDay {
    pub day: String,
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationSummary {
    pub methods: Vec<MethodSummary>,
    /// Days where perfect RES information cost more than O-PO.
    pub flagged_ppo_days: Vec<FlaggedDay>,
    pub trainings: Vec<WeekTraining>,
    pub failures: Vec<DayFailure>,
}

#[derive(Debug, Clone)]
pub struct EvaluationOutcome {
    pub rows: Vec<EvaluationRow>,
    pub summary: EvaluationSummary,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Hourly error quantiles `(lower, upper)` of realization minus prediction.
#[derive(Debug, Clone, Serialize)]
struct ErrorBand {
    lookback: Vec<String>,
    res: Vec<Vec<(f64, f64)>>,
    load: Vec<Vec<(f64, f64)>>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn error_band(ds: &Dataset, week_start: NaiveDate, cfg: &RunConfig) -> Result<ErrorBand, String> {
    let days: Vec<&OperationScenario> = window_dates(week_start, cfg.training_days, cfg.weekday_split)
        .iter()
        .filter_map(|d| ds.days.get(d))
        .collect();
    if days.is_empty() {
        return Err(format!("no history before {week_start} to size the scenario band"));
    }
    let (lo, hi) = (cfg.tsp.lower_quantile, cfg.tsp.upper_quantile);
    let band = |pred: fn(&OperationScenario) -> &Matrix, act: fn(&OperationScenario) -> &Matrix| {
        let first = pred(days[0]);
        (0..first.len())
            .map(|t| {
                (0..first[t].len())
                    .map(|j| {
                        let mut e: Vec<f64> = days.iter().map(|s| act(s)[t][j] - pred(s)[t][j]).collect();
                        e.sort_by(f64::total_cmp);
                        (quantile(&e, lo), quantile(&e, hi))
                    })
                    .collect()
            })
            .collect()
    };
    Ok(ErrorBand {
        lookback: days.iter().map(|s| s.id.clone()).collect(),
        res: band(|s| &s.raw_res_prediction, |s| &s.actual_res),
        load: band(|s| &s.raw_load_prediction, |s| &s.actual_load),
    })
}

fn band_bounds(pred: &Matrix, band: &[Vec<(f64, f64)>]) -> (Matrix, Matrix) {
    let lower: Matrix = pred.iter().zip(band).map(|(p, b)| p.iter().zip(b).map(|(v, (l, _))| (v + l).max(0.0)).collect()).collect();
    let upper = pred
        .iter()
        .zip(band)
        .zip(&lower)
        .map(|((p, b), lo)| p.iter().zip(b).zip(lo).map(|((v, (_, h)), l)| (v + h).max(*l)).collect())
        .collect();
    (lower, upper)
}

fn day_seed(seed: u64, day: NaiveDate) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ day.num_days_from_ce() as u64
}

fn sampled_set(cfg: &RunConfig, scenario: &OperationScenario, day: NaiveDate, band: &ErrorBand) -> Result<UncertaintyScenarioSet, String> {
    let (res_lower, res_upper) = band_bounds(&scenario.raw_res_prediction, &band.res);
    let (load_lower, load_upper) = band_bounds(&scenario.raw_load_prediction, &band.load);
    let bounds = ScenarioBounds { res_lower, res_upper, load_lower, load_upper };
    generate_scenarios(&bounds, cfg.tsp.samples, day_seed(cfg.seed, day)).map_err(|e| e.to_string())
}

fn sha256_hex(value: &serde_json::Value) -> String {
    let digest = Sha256::digest(value.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Inputs known before the week starts.
struct WeekInputs {
    predictors: Vec<(Method, Result<AffinePredictorPair, String>)>,
    band: Option<Result<ErrorBand, String>>,
}

fn prepare_week(cfg: &RunConfig, ds: &Dataset, week_start: NaiveDate, methods: &[Method], trainings: &mut Vec<WeekTraining>) -> Result<WeekInputs, HarnessError> {
    let mut predictors = Vec::new();
    for &m in methods {
        let Method::CPo { nt, variant } = m else { continue };
        if cfg.force_identity {
            let s = cfg.training_config(vec![], train_target(variant)).structure;
            predictors.push((m, Ok(AffinePredictorPair::identity(ds.system.horizon(), ds.system.num_res(), s.alpha, s.mapping))));
            continue;
        }
        let mut entry = WeekTraining { week_start, method: m, days: vec![], status: None, objective: None, gap: None, error: None };
        let trained = training_window(ds, week_start, nt, cfg.weekday_split).and_then(|window| {
            entry.days = window.iter().map(|s| s.id.clone()).collect();
            log::info!("week of {week_start}: training {m} on {} days", window.len());
            Ok(train(&ds.system, &cfg.training_config(window, train_target(variant)))?)
        });
        match trained {
            Ok((pair, state)) => {
                entry.status = Some(state.status);
                entry.objective = Some(state.ub);
                entry.gap = Some(state.gap());
                let stem = format!("{week_start}_{m}");
                write_file(&cfg.out.join("predictors").join(format!("{stem}.json")), pair.to_json_string()?.as_bytes())?;
                write_file(&cfg.out.join("training").join(format!("{stem}.csv")), &training_log_bytes(&state)?)?;
                predictors.push((m, Ok(pair)));
            }
            Err(e) => {
                log::error!("week of {week_start}: training {m} failed: {e}");
                entry.error = Some(e.to_string());
                predictors.push((m, Err(e.to_string())));
            }
        }
        trainings.push(entry);
    }
    let band = methods.iter().any(|m| matches!(m, Method::TSp { .. })).then(|| error_band(ds, week_start, cfg));
    Ok(WeekInputs { predictors, band })
}

fn evaluate_day(
    cfg: &RunConfig,
    ds: &Dataset,
    day: NaiveDate,
    methods: &[Method],
    week: &WeekInputs,
) -> Vec<Result<(EvaluationRecord, String, Vec<String>), DayFailure>> {
    let scenario = &ds.days[&day];
    let (pen, opts) = (cfg.penalties(), cfg.solve_options());
    let base = serde_json::json!({ "scenario": scenario, "penalties": pen, "gap": opts.gap, "time_limit": opts.time_limit });
    let mut sampled: Option<Result<UncertaintyScenarioSet, String>> = None;
    methods
        .iter()
        .map(|&m| {
            let mut run = || -> Result<(EvaluationRecord, serde_json::Value, Vec<String>), String> {
                match m {
                    Method::OPo => Ok((run_open_loop_record(&ds.system, scenario, &pen, &opts).map_err(|e| e.to_string())?, serde_json::Value::Null, vec![])),
                    Method::PPo => Ok((run_perfect(&ds.system, scenario, &pen, &opts).map_err(|e| e.to_string())?, serde_json::Value::Null, vec![])),
                    Method::CPo { .. } => {
                        let pair = week.predictors.iter().find(|(k, _)| *k == m).map(|(_, p)| p).expect("prepared per method");
                        let pair = pair.as_ref().map_err(|e| format!("no predictor: {e}"))?;
                        let mut rec = run_prescriptive_uc(&ds.system, pair, scenario, &pen, &opts).map_err(|e| e.to_string())?;
                        rec.method = m;
                        Ok((rec, serde_json::to_value(pair).map_err(|e| e.to_string())?, pair.metadata.training_days.clone()))
                    }
                    Method::TSp { ns } => {
                        let band = week.band.as_ref().expect("prepared for T-SP").as_ref()?;
                        let set = sampled.get_or_insert_with(|| sampled_set(cfg, scenario, day, band)).as_ref()?;
                        let reduced = reduce_scenarios(set, ns).map_err(|e| e.to_string())?;
                        let rec = run_tsp(&ds.system, scenario, &reduced, &pen, &opts).map_err(|e| e.to_string())?;
                        let extra = serde_json::json!({ "band": band, "samples": cfg.tsp.samples, "seed": day_seed(cfg.seed, day) });
                        Ok((rec, extra, band.lookback.clone()))
                    }
                }
            };
            run()
                .map(|(rec, extra, history)| {
                    let hash = sha256_hex(&serde_json::json!({ "method": m, "inputs": base, "predictor": extra }));
                    (rec, hash, history)
                })
                .map_err(|error| {
                    log::error!("{day} {m}: {error}");
                    DayFailure { day: scenario.id.clone(), method: m, error }
                })
        })
        .collect()
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn evaluation_csv(rows: &[EvaluationRow]) -> Result<Vec<u8>, HarnessError> {
    let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let mut buf = format!("# generated {stamp}\n").into_bytes();
    let mut w = csv::Writer::from_writer(&mut buf);
    let csv_err = |e: csv::Error| HarnessError::Io(e.to_string());
    let mut header = vec!["day", "method"];
    header.extend(CostReport::CSV_HEADER);
    header.extend(["ei_percent", "voi", "input_hash"]);
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.record.day.clone(), r.record.method.to_string()];
        rec.extend(r.record.breakdown.csv_fields().iter().map(|v| format!("{v:.6}")));
        rec.extend([opt_cell(r.ei), opt_cell(r.voi), r.input_hash.clone()]);
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::Io(e.to_string()))?;
    drop(w);
    Ok(buf)
}

fn summarize(cfg: &RunConfig, methods: &[Method], rows: &[EvaluationRow], trainings: Vec<WeekTraining>, failures: Vec<DayFailure>) -> EvaluationSummary {
    let cost = |day: &str, m: Method| rows.iter().find(|r| r.record.day == day && r.record.method == m).map(|r| r.record.actual_cost);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let methods = methods
        .iter()
        .filter_map(|&m| {
            let mine: Vec<&EvaluationRow> = rows.iter().filter(|r| r.record.method == m).collect();
            if mine.is_empty() {
                return None;
            }
            let average_cost = mean(&mine.iter().map(|r| r.record.actual_cost).collect::<Vec<_>>());
            let paired: Vec<(f64, f64)> = mine.iter().filter_map(|r| Some((cost(&r.record.day, Method::OPo)?, r.record.actual_cost))).collect();
            let (opo, me): (Vec<f64>, Vec<f64>) = paired.iter().copied().unzip();
            let ei = (!paired.is_empty()).then(|| metric_ei(mean(&opo), mean(&me)).ok()).flatten();
            let triples: Vec<[f64; 3]> = mine
                .iter()
                .filter_map(|r| Some([cost(&r.record.day, Method::OPo)?, r.record.actual_cost, cost(&r.record.day, Method::PPo)?]))
                .collect();
            let avg = |k: usize| mean(&triples.iter().map(|t| t[k]).collect::<Vec<_>>());
            let voi = (!triples.is_empty()).then(|| metric_voi(avg(0), avg(1), avg(2)).ok()).flatten();
            Some(MethodSummary { method: m, days: mine.len(), average_cost, ei, voi })
        })
        .collect();
    let flagged_ppo_days = rows
        .iter()
        .filter(|r| r.record.method == Method::OPo)
        .filter_map(|opo| {
            let ppo = rows.iter().find(|r| r.record.day == opo.record.day && r.record.method == Method::PPo)?;
            let excess = perfect_information_excess(&opo.record, &ppo.record, cfg.solver.gap * opo.record.actual_cost.abs())?;
            log::warn!("{}: perfect information costs {excess:.2} more than O-PO", opo.record.day);
            Some(FlaggedDay { day: opo.record.day.clone(), excess })
        })
        .collect();
    EvaluationSummary { methods, flagged_ppo_days, trainings, failures }
}

/// Weekly rolling evaluation over the target days in `[start, end]`.
/// Predictors for closed-loop methods are retrained at the start of each
/// seven-day block on the `NT` days before it, so a block's own days never
/// reach its predictor. Failures stay confined to their method-day.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvaluationOutcome, HarnessError> {
    let ds = Dataset::load(cfg)?;
    evaluate_dataset(cfg, &ds)
}

pub(crate) fn evaluate_dataset(cfg: &RunConfig, ds: &Dataset) -> Result<EvaluationOutcome, HarnessError> {
    let methods = cfg.method_list()?;
    let range = |d: &NaiveDate| cfg.start.map_or(true, |s| *d >= s) && cfg.end.map_or(true, |e| *d <= e);
    let targets: Vec<NaiveDate> = ds.days.keys().copied().filter(range).collect();
    let Some(&first) = targets.first() else {
        let show = |d: Option<NaiveDate>| d.map_or("open".to_string(), |d| d.to_string());
        return Err(HarnessError::NoTargetDays { start: show(cfg.start), end: show(cfg.end) });
    };
    let origin = cfg.start.unwrap_or(first);
    let mut weeks: BTreeMap<i64, Vec<NaiveDate>> = BTreeMap::new();
    for d in &targets {
        weeks.entry((*d - origin).num_days() / 7).or_default().push(*d);
    }

    let mut trainings = Vec::new();
    let mut jobs = Vec::new();
    for (k, days) in &weeks {
        let week_start = origin + Duration::days(7 * k);
        let inputs = prepare_week(cfg, ds, week_start, &methods, &mut trainings)?;
        jobs.push((inputs, days.clone()));
    }
    let work: Vec<(&WeekInputs, NaiveDate)> = jobs.iter().flat_map(|(w, days)| days.iter().map(move |d| (w, *d))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let results: Vec<_> = pool.install(|| work.par_iter().map(|(w, d)| evaluate_day(cfg, ds, *d, &methods, w)).collect());

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for day in results {
        let ok: Vec<_> = day.into_iter().filter_map(|r| r.map_err(|f| failures.push(f)).ok()).collect();
        let cost = |m: Method| ok.iter().find(|(r, _, _)| r.method == m).map(|(r, _, _)| r.actual_cost);
        let (opo, ppo) = (cost(Method::OPo), cost(Method::PPo));
        for (record, input_hash, history) in ok.iter().cloned() {
            let ei = opo.and_then(|o| metric_ei(o, record.actual_cost).ok());
            let voi = opo.zip(ppo).and_then(|(o, p)| metric_voi(o, record.actual_cost, p).ok());
            rows.push(EvaluationRow { record, ei, voi, input_hash, history });
        }
    }

    let summary = summarize(cfg, &methods, &rows, trainings, failures);
    let csv_path = cfg.out.join(EVALUATION_CSV);
    let summary_path = cfg.out.join(SUMMARY_JSON);
    write_file(&csv_path, &evaluation_csv(&rows)?)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| HarnessError::Io(e.to_string()))?;
    write_file(&summary_path, json.as_bytes())?;
    Ok(EvaluationOutcome { rows, summary, csv_path, summary_path })
}

/// Perturbs one day's RES prediction over the configured error grid and
/// writes `asymmetry.csv`.
pub fn cmd_asymmetry(cfg: &RunConfig) -> Result<AsymmetryTable, HarnessError> {
    let (system, scenarios) = load_inputs(cfg)?;
    let base = match &cfg.asymmetry.day {
        Some(id) => scenarios.iter().find(|s| &s.id == id).ok_or_else(|| HarnessError::Config(format!("no scenario day `{id}`")))?,
        None => scenarios.first().ok_or_else(|| HarnessError::Config("the scenario file has no days".into()))?,
    };
    let table = asymmetry_experiment(&system, base, &cfg.asymmetry.errors, cfg.seed, &cfg.penalties(), &cfg.solve_options())?;
    let mut buf = Vec::new();
    write_asymmetry_csv(&mut buf, &table)?;
    write_file(&cfg.out.join("asymmetry.csv"), &buf)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        parse_day(s).unwrap()
    }

    #[test]
    fn windows_count_back_from_the_target() {
        assert_eq!(window_dates(d("2024-01-03"), 2, false), vec![d("2024-01-01"), d("2024-01-02")]);
        // 2024-01-08 is a Monday; the split skips the weekend
        assert_eq!(window_dates(d("2024-01-08"), 2, true), vec![d("2024-01-04"), d("2024-01-05")]);
        assert_eq!(window_dates(d("2024-01-07"), 2, true), vec![d("2023-12-31"), d("2024-01-06")]);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [0.0, 10.0, 20.0];
        assert_eq!(quantile(&v, 0.0), 0.0);
        assert_eq!(quantile(&v, 0.25), 5.0);
        assert_eq!(quantile(&v, 1.0), 20.0);
        assert_eq!(quantile(&[3.0], 0.95), 3.0);
    }

    #[test]
    fn band_bounds_stay_nonnegative_and_ordered() {
        let (lo, hi) = band_bounds(&vec![vec![5.0, 1.0]], &[vec![(-10.0, 2.0), (-0.5, -3.0)]]);
        assert_eq!(lo, vec![vec![0.0, 0.5]]);
        assert_eq!(hi, vec![vec![7.0, 0.5]]);
    }
}
