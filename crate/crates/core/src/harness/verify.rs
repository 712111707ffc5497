use std::time::Instant;

use serde::Serialize;

use crate::data::{load_scenarios, load_system, OperationScenario, PowerSystem};
use crate::erm::{train, verify_enumeration, write_training_log, IterationLog, TrainingConfig, TrainingStatus};
use crate::fixtures::{
    bias_doubled_days, bias_system, ccg_days, ccg_system, identity_optimal_days, tiny_instances, CCG_ALPHA,
};
use crate::milp::{big_m_sentinel_lp, kkt_equivalence, random_lp, KktCheck, SolveOptions};
use crate::predictors::{PredictorStructure, TrainTarget};

use super::{io_err, HarnessError, RunConfig};

pub const KKT_CORPUS_SIZE: u64 = 50;
/// Relative agreement required between direct and KKT-embedded optima.
pub const KKT_TOLERANCE: f64 = 1e-6;

/// `m` in `{0, 0.05, ..., 1.5}`.
pub fn verification_grid() -> Vec<f64> {
    (0..=30).map(|k| k as f64 * 0.05).collect()
}

/// Scalar RES multiplier capped at 1.5, reserve map pinned, no
/// regularization: the family [`verification_grid`] spans.
pub fn enumeration_config(scenarios: Vec<OperationScenario>, alpha: f64) -> TrainingConfig {
    let mut c = TrainingConfig::new(scenarios);
    c.structure = PredictorStructure { scalar_m: true, target: TrainTarget::ResOnly, multiplier_cap: Some(1.5), alpha, ..Default::default() };
    c.lambda_w = 0.0;
    c.lambda_r = 0.0;
    c.solver = SolveOptions::with_gap(1e-6);
    c.sp2_tolerance = Some(1e-4);
    c
}

fn full_config(scenarios: Vec<OperationScenario>, alpha: f64) -> TrainingConfig {
    let mut c = TrainingConfig::new(scenarios);
    c.structure = PredictorStructure { alpha, multiplier_cap: Some(2.0), ..Default::default() };
    c.lambda_w = 1.0;
    c.lambda_r = 1.0;
    c.solver = SolveOptions::with_gap(1e-6);
    c.sp2_tolerance = Some(1e-4);
    c
}

/// Every shipped training fixture with the settings it is trained under.
pub fn bound_fixtures() -> Vec<(String, PowerSystem, TrainingConfig)> {
    let mut out = vec![
        ("bias8".to_string(), bias_system(), full_config(bias_doubled_days(), 0.0)),
        ("identity".to_string(), bias_system(), full_config(identity_optimal_days(), 0.0)),
        ("ccg".to_string(), ccg_system(), full_config(ccg_days(), CCG_ALPHA)),
    ];
    for inst in tiny_instances() {
        out.push((format!("tiny-{}", inst.name), inst.system, enumeration_config(inst.scenarios, 0.0)));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationLine {
    pub name: String,
    pub patterns: usize,
    pub brute_force: f64,
    pub brute_force_m: f64,
    pub ccg_objective: f64,
    pub ccg_m: f64,
    pub relative_difference: f64,
    pub agrees: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KktFailure {
    pub name: String,
    pub check: KktCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct KktSuite {
    pub big_m: f64,
    pub checked: usize,
    pub passed: usize,
    pub failures: Vec<KktFailure>,
}

impl KktSuite {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.passed == self.checked
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundLine {
    pub fixture: String,
    pub iterations: usize,
    pub status: TrainingStatus,
    pub final_gap: f64,
    pub gap_target: f64,
    pub lb_nondecreasing: bool,
    pub ub_nonincreasing: bool,
    pub log: Vec<IterationLog>,
}

impl BoundLine {
    /// Monotone bounds, and the gap closed unless a limit flag is set.
    pub fn ok(&self) -> bool {
        self.lb_nondecreasing && self.ub_nonincreasing && (self.final_gap <= self.gap_target || self.status != TrainingStatus::Converged)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub enumeration: Vec<EnumerationLine>,
    pub kkt: KktSuite,
    pub bounds: Vec<BoundLine>,
    pub passed: bool,
}

/// KKT equivalence on the seeded corpus and the Big-M sentinel LP.
pub fn kkt_suite(big_m: f64, count: u64) -> Result<KktSuite, HarnessError> {
    let mut cases: Vec<(String, _)> = (0..count).map(|s| (format!("corpus-{s}"), random_lp(s))).collect();
    cases.push(("sentinel".into(), big_m_sentinel_lp()));
    let mut suite = KktSuite { big_m, checked: cases.len(), passed: 0, failures: vec![] };
    for (name, lp) in cases {
        let check = kkt_equivalence(&lp, big_m).map_err(crate::erm::ErmError::from)?;
        if check.passed(KKT_TOLERANCE) {
            suite.passed += 1;
        } else {
            suite.failures.push(KktFailure { name, check });
        }
    }
    Ok(suite)
}

/// Trains `config` and checks the bound sequence in its log. The lower bound
/// starts at minus infinity and is compared from its first finite value.
pub fn bound_check(name: &str, system: &PowerSystem, config: &TrainingConfig) -> Result<BoundLine, HarnessError> {
    let (_, state) = train(system, config)?;
    let log = state.log.clone();
    let lb_nondecreasing = log.windows(2).all(|w| w[1].lb >= w[0].lb);
    let ub_nonincreasing = log.windows(2).all(|w| w[1].ub <= w[0].ub);
    Ok(BoundLine {
        fixture: name.to_string(),
        iterations: state.iteration,
        status: state.status,
        final_gap: state.gap(),
        gap_target: config.gap_target,
        lb_nondecreasing,
        ub_nonincreasing,
        log,
    })
}

fn enumeration_line(name: &str, system: &PowerSystem, scenarios: Vec<OperationScenario>, alpha: f64) -> Result<EnumerationLine, HarnessError> {
    let start = Instant::now();
    let r = verify_enumeration(system, &enumeration_config(scenarios, alpha), &verification_grid())?;
    Ok(EnumerationLine {
        name: name.to_string(),
        patterns: r.patterns,
        brute_force: r.brute_force.objective,
        brute_force_m: r.brute_force.m,
        ccg_objective: r.ccg_objective,
        ccg_m: r.ccg_m,
        relative_difference: r.relative_difference,
        agrees: r.agrees,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs every oracle check: enumeration against training, the KKT suite
/// at `verify.big_m`, bound monotonicity on the training fixtures.
/// Writes `verify.json` and one training log per fixture when `out` is set.
pub fn cmd_verify(cfg: &RunConfig, write: bool) -> Result<VerifyReport, HarnessError> {
    let enumeration = match (&cfg.verify.system, &cfg.verify.scenarios) {
        (Some(sys), Some(sc)) => {
            let system = load_system(sys)?;
            let scenarios = load_scenarios(sc, &system, cfg.alpha)?;
            vec![enumeration_line(&sys.display().to_string(), &system, scenarios, cfg.alpha)?]
        }
        (None, None) => tiny_instances()
            .into_iter()
            .map(|i| enumeration_line(i.name, &i.system, i.scenarios, 0.0))
            .collect::<Result<_, _>>()?,
        _ => return Err(HarnessError::Config("verify.system and verify.scenarios must be set together".into())),
    };
    let kkt = kkt_suite(cfg.verify.big_m, KKT_CORPUS_SIZE)?;
    let bounds = bound_fixtures()
        .iter()
        .map(|(name, sys, c)| bound_check(name, sys, c))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = enumeration.iter().all(|p| p.agrees) && kkt.ok() && bounds.iter().all(BoundLine::ok);
    let report = VerifyReport { enumeration, kkt, bounds, passed };
    if write {
        std::fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
        for b in &report.bounds {
            let path = cfg.out.join(format!("bounds_{}.csv", b.fixture));
            let file = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            write_training_log(file, &b.log)?;
        }
        let path = cfg.out.join("verify.json");
        let json = serde_json::to_string_pretty(&report).map_err(|e| HarnessError::Io(e.to_string()))?;
        std::fs::write(&path, json).map_err(|e| io_err(&path, e))?;
    }
    Ok(report)
}
