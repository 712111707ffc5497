//! Small hand-checkable systems shipped with the library and used by the
//! verification command and the test suites.

use crate::data::{
    build_sensitivities, rule_of_thumb_reserve, Branch, InitialStatus, OperationScenario, PowerSystem, RenewableUnit,
    ReserveRequirement, Segment,
    ThermalUnit,
};

/// A unit with a single $20/MWh segment on [10, 100] MW, no-load $50,
/// startup $100, offline at t = 0 and unconstrained ramping.
pub fn basic_unit(id: &str, bus: usize) -> ThermalUnit {
    ThermalUnit {
        id: id.into(),
        bus,
        quick_start: false,
        p_min: 10.0,
        p_max: 100.0,
        segments: vec![Segment { width_mw: 100.0, cost_per_mwh: 20.0 }],
        startup_cost: 100.0,
        noload_cost: 50.0,
        ramp_up: 100.0,
        ramp_down: 100.0,
        startup_ramp: 100.0,
        shutdown_ramp: 100.0,
        min_up: 1,
        min_down: 1,
        sr_max: 100.0,
        nr_max: 0.0,
        initial_status: InitialStatus { committed: false, output_mw: 0.0 },
    }
}

fn single_bus(units: Vec<ThermalUnit>, n_res: usize, horizon: usize) -> PowerSystem {
    PowerSystem {
        buses: vec!["n1".into()],
        thermal_units: units,
        res_units: (0..n_res).map(|j| RenewableUnit { id: format!("w{}", j + 1), bus: 0 }).collect(),
        branches: vec![],
        load_buses: vec![0],
        horizon_hours: horizon,
    }
}

/// One bus, one [`basic_unit`], one RES unit, one hour.
pub fn t1_system() -> PowerSystem {
    single_bus(vec![basic_unit("g1", 0)], 1, 1)
}

/// A scenario for a single-RES, single-load system with constant hourly
/// values and zero reserve requirement.
pub fn flat_scenario(system: &PowerSystem, id: &str, w_hat: f64, w_tilde: f64, load: f64) -> OperationScenario {
    let t = system.horizon();
    let nj = system.num_res();
    let nq = system.num_loads();
    OperationScenario {
        id: id.into(),
        raw_res_prediction: vec![vec![w_hat; nj]; t],
        raw_load_prediction: vec![vec![load / nq as f64; nq]; t],
        actual_res: vec![vec![w_tilde; nj]; t],
        actual_load: vec![vec![load / nq as f64; nq]; t],
        raw_reserve: vec![ReserveRequirement::default(); t],
    }
}

/// Fixture T1 day: load 80 MW, no reserve requirement.
pub fn t1_scenario(w_hat: f64, w_tilde: f64) -> OperationScenario {
    flat_scenario(&t1_system(), "t1", w_hat, w_tilde, 80.0)
}

/// Two units with identical day-ahead economics; the second one can only
/// ramp to 55 MW from cold, which matters only in the dispatch.
pub fn tie_system() -> PowerSystem {
    let a = basic_unit("ga", 0);
    let mut b = basic_unit("gb", 0);
    b.startup_ramp = 55.0;
    single_bus(vec![a, b], 1, 1)
}

/// Two buses joined by a 40 MW line, cheap unit at bus 1, expensive
/// quick-start unit and the load at bus 2, RES at bus 1.
pub fn two_bus_system() -> PowerSystem {
    let mut cheap = basic_unit("cheap", 0);
    cheap.sr_max = 50.0;
    let mut peak = basic_unit("peak", 1);
    peak.quick_start = true;
    peak.p_min = 5.0;
    peak.p_max = 60.0;
    peak.segments = vec![Segment { width_mw: 60.0, cost_per_mwh: 60.0 }];
    peak.startup_cost = 40.0;
    peak.noload_cost = 10.0;
    peak.nr_max = 60.0;
    let sys = PowerSystem {
        buses: vec!["n1".into(), "n2".into()],
        thermal_units: vec![cheap, peak],
        res_units: vec![RenewableUnit { id: "w1".into(), bus: 0 }],
        branches: vec![Branch {
            id: "l1".into(),
            from_bus: 0,
            to_bus: 1,
            capacity_mw: 40.0,
            reactance: 0.1,
            sensitivity_row: None,
        }],
        load_buses: vec![1],
        horizon_hours: 2,
    };
    build_sensitivities(&sys, 0).expect("two-bus fixture is connected")
}

/// Scenario of a single-RES, single-load system from hourly series, with the
/// rule-of-thumb reserve at fraction `alpha`.
pub fn hourly_scenario(id: &str, w_hat: &[f64], w_tilde: &[f64], load: &[f64], alpha: f64) -> OperationScenario {
    let col = |v: &[f64]| v.iter().map(|&x| vec![x]).collect::<Vec<_>>();
    let raw_load_prediction = col(load);
    OperationScenario {
        id: id.into(),
        raw_res_prediction: col(w_hat),
        actual_res: col(w_tilde),
        actual_load: raw_load_prediction.clone(),
        raw_reserve: rule_of_thumb_reserve(&raw_load_prediction, alpha).expect("alpha in [0, 1]"),
        raw_load_prediction,
    }
}

/// One bus, one [`basic_unit`] without spinning reserve capability and one
/// RES unit over two hours. Without spinning reserve the dispatch must follow
/// the scheduled output, so each RES prediction maps to one actual cost.
pub fn bias_system() -> PowerSystem {
    let mut g = basic_unit("g1", 0);
    g.sr_max = 0.0;
    single_bus(vec![g], 1, 2)
}

const BIAS_LOAD: [[f64; 2]; 8] =
    [[80.0, 70.0], [75.0, 85.0], [60.0, 90.0], [85.0, 65.0], [70.0, 75.0], [90.0, 80.0], [65.0, 70.0], [78.0, 88.0]];
const BIAS_RES: [[f64; 2]; 8] =
    [[40.0, 30.0], [20.0, 45.0], [35.0, 25.0], [45.0, 20.0], [30.0, 40.0], [25.0, 35.0], [40.0, 38.0], [30.0, 44.0]];

/// Eight consecutive days on [`bias_system`] whose raw RES prediction is
/// twice the realization; zero reserve requirement.
pub fn bias_doubled_days() -> Vec<OperationScenario> {
    (0..8)
        .map(|d| {
            let truth = BIAS_RES[d];
            let doubled = truth.map(|w| 2.0 * w);
            hourly_scenario(&format!("2024-01-{:02}", d + 1), &doubled, &truth, &BIAS_LOAD[d], 0.0)
        })
        .collect()
}

/// The days of [`bias_doubled_days`] with exact RES predictions.
pub fn identity_optimal_days() -> Vec<OperationScenario> {
    (0..4)
        .map(|d| hourly_scenario(&format!("2024-02-{:02}", d + 1), &BIAS_RES[d], &BIAS_RES[d], &BIAS_LOAD[d], 0.0))
        .collect()
}

/// A small verification instance: a system with at most two units and two
/// hours and at most two scenarios.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub name: &'static str,
    pub system: PowerSystem,
    pub scenarios: Vec<OperationScenario>,
}

/// Instances small enough to enumerate every commitment pattern.
pub fn tiny_instances() -> Vec<TinyInstance> {
    let two_bus = two_bus_system();
    vec![
        TinyInstance { name: "t1", system: t1_system(), scenarios: vec![t1_scenario(80.0, 40.0)] },
        TinyInstance {
            name: "tie",
            system: tie_system(),
            scenarios: vec![
                flat_scenario(&tie_system(), "tie-a", 60.0, 30.0, 130.0),
                flat_scenario(&tie_system(), "tie-b", 40.0, 20.0, 90.0),
            ],
        },
        TinyInstance {
            name: "two-bus",
            scenarios: vec![
                flat_scenario(&two_bus, "tb-a", 40.0, 20.0, 50.0),
                flat_scenario(&two_bus, "tb-b", 20.0, 10.0, 45.0),
            ],
            system: two_bus,
        },
    ]
}

/// Two non-quick-start units on one bus over two hours; cheap energy with
/// little spinning headroom against dearer energy with more.
pub fn ccg_system() -> PowerSystem {
    let mut a = basic_unit("ga", 0);
    a.startup_cost = 130.0;
    a.segments[0].cost_per_mwh = 10.0;
    a.sr_max = 3.0;
    let mut b = basic_unit("gb", 0);
    b.startup_cost = 120.0;
    b.p_max = 60.0;
    b.segments = vec![Segment { width_mw: 60.0, cost_per_mwh: 27.0 }];
    b.sr_max = 17.0;
    single_bus(vec![a, b], 1, 2)
}

/// Rule-of-thumb fraction of the [`ccg_days`] reserve.
pub const CCG_ALPHA: f64 = 0.2;

/// Two days on [`ccg_system`] on which the trainer needs more than one
/// master solve.
pub fn ccg_days() -> Vec<OperationScenario> {
    vec![
        hourly_scenario("2024-03-01", &[55.0, 8.0], &[43.0, 11.0], &[42.0, 81.0], CCG_ALPHA),
        hourly_scenario("2024-03-02", &[47.0, 20.0], &[46.0, 11.0], &[45.0, 73.0], CCG_ALPHA),
    ]
}

/// One hour, one bus: a cheap unit with 5 MW of spinning headroom and a dear
/// quick-start unit. Missing RES beyond the headroom costs quick-start energy
/// or shortfall penalties; surplus RES is curtailed for free.
pub fn reserve_scarce_system() -> PowerSystem {
    let mut base = basic_unit("base", 0);
    base.sr_max = 5.0;
    base.initial_status = InitialStatus { committed: true, output_mw: 50.0 };
    let mut peak = basic_unit("peak", 0);
    peak.quick_start = true;
    peak.p_min = 0.0;
    peak.p_max = 40.0;
    peak.segments = vec![Segment { width_mw: 40.0, cost_per_mwh: 80.0 }];
    peak.startup_cost = 300.0;
    peak.noload_cost = 100.0;
    peak.sr_max = 0.0;
    peak.nr_max = 40.0;
    single_bus(vec![base, peak], 1, 1)
}

/// Load 100 MW, 50 MW of RES; reserve 10% of load, half spinning.
pub fn reserve_scarce_day() -> OperationScenario {
    hourly_scenario("scarce", &[50.0], &[50.0], &[100.0], 0.1)
}
