use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use copo::data::{load_system, Matrix, PowerSystem, ReserveRequirement};
use copo::fixtures::*;
use copo::milp::{fix_binaries, integer_assignment, solve, SolveOptions, SolveStatus, VarId};
use copo::ops::*;
use proptest::prelude::*;

fn exact() -> SolveOptions {
    SolveOptions::exact()
}

fn zero_reserve(t: usize) -> Vec<ReserveRequirement> {
    vec![ReserveRequirement::default(); t]
}

/// Enumerates the commitment of the single T1 unit and returns the cheapest
/// feasible fixed-binary LP as (I, objective).
fn t1_enumerate(w_hat: f64) -> (bool, f64) {
    let sys = t1_system();
    let inputs = UcInputs::constant(&vec![vec![w_hat]], &zero_reserve(1), &vec![vec![80.0]]);
    let uc = build_uc(&sys, &inputs, UcOptions::default()).unwrap();
    let mut best: Option<(bool, f64)> = None;
    for on in [false, true] {
        let v = &uc.vars;
        let a = BTreeMap::from([
            (v.i[0][0], f64::from(u8::from(on))),
            (v.u[0][0], f64::from(u8::from(on))),
            (v.d[0][0], 0.0),
            (v.o[0][0], 0.0),
        ]);
        let lp = fix_binaries(&uc.model, &a).unwrap();
        let r = solve(&lp.lp, &exact()).unwrap();
        if r.status == SolveStatus::Optimal && best.map_or(true, |(_, c)| r.objective < c) {
            best = Some((on, r.objective));
        }
    }
    best.unwrap()
}

#[test]
fn t1_commits_with_low_res() {
    let (on, cost) = t1_enumerate(30.0);
    assert!(on);
    assert_abs_diff_eq!(cost, 1150.0, epsilon = 1e-6);
    let plan = solve_uc(&t1_system(), &vec![vec![30.0]], &zero_reserve(1), &vec![vec![80.0]], &exact()).unwrap();
    assert!(plan.i[0][0]);
    assert_abs_diff_eq!(plan.w[0][0], 30.0, epsilon = 1e-6);
    assert_abs_diff_eq!(plan.p[0][0], 50.0, epsilon = 1e-6);
    assert_abs_diff_eq!(plan.anticipated_cost(), 1150.0, epsilon = 1e-6);
}

#[test]
fn t1_high_res_prefers_staying_off() {
    // with 200 MW of RES the unit can stay offline at zero cost
    let (on, cost) = t1_enumerate(200.0);
    assert!(!on);
    assert_abs_diff_eq!(cost, 0.0, epsilon = 1e-9);
    let plan = solve_uc(&t1_system(), &vec![vec![200.0]], &zero_reserve(1), &vec![vec![80.0]], &exact()).unwrap();
    assert!(!plan.i[0][0]);
    assert_abs_diff_eq!(plan.anticipated_cost(), 0.0, epsilon = 1e-9);
}

#[test]
fn t1_high_res_with_unit_forced_on_costs_350() {
    let sys = t1_system();
    let inputs = UcInputs::constant(&vec![vec![200.0]], &zero_reserve(1), &vec![vec![80.0]]);
    let uc = build_uc(&sys, &inputs, UcOptions::default()).unwrap();
    let v = &uc.vars;
    let a = BTreeMap::from([(v.i[0][0], 1.0), (v.u[0][0], 1.0), (v.d[0][0], 0.0), (v.o[0][0], 0.0)]);
    let lp = fix_binaries(&uc.model, &a).unwrap();
    let r = solve(&lp.lp, &exact()).unwrap();
    let full = lp.restore(&r.values);
    assert_abs_diff_eq!(r.objective, 350.0, epsilon = 1e-6);
    assert_abs_diff_eq!(full[v.w[0][0].0], 70.0, epsilon = 1e-6);
    assert_abs_diff_eq!(uc.vars.p(0, 0).eval(&full), 10.0, epsilon = 1e-6);
}

#[test]
fn excessive_reserve_is_infeasible() {
    let req = vec![ReserveRequirement { sr: 500.0, nr: 0.0 }];
    let err = solve_uc(&t1_system(), &vec![vec![30.0]], &req, &vec![vec![80.0]], &exact()).unwrap_err();
    assert!(matches!(err, OpsError::UcInfeasible(_)), "{err}");
    let mut sc = t1_scenario(30.0, 30.0);
    sc.raw_reserve = req;
    let err = run_open_loop(&t1_system(), &sc, &Penalties::default(), &exact()).unwrap_err();
    assert!(err.to_string().contains("t1"), "{err}");
}

#[test]
fn negative_prediction_is_rejected() {
    let err = solve_uc(&t1_system(), &vec![vec![-1.0]], &zero_reserve(1), &vec![vec![80.0]], &exact()).unwrap_err();
    assert!(matches!(err, OpsError::NegativeInput(_)));
    let err = solve_uc(&t1_system(), &vec![vec![1.0, 2.0]], &zero_reserve(1), &vec![vec![80.0]], &exact()).unwrap_err();
    assert!(matches!(err, OpsError::Dimension(_)));
}

fn t1_plan() -> CommitmentPlan {
    solve_uc(&t1_system(), &vec![vec![30.0]], &zero_reserve(1), &vec![vec![80.0]], &exact()).unwrap()
}

#[test]
fn ed_replays_plan_when_forecast_is_right() {
    let out = solve_ed(&t1_system(), &t1_plan(), &vec![vec![30.0]], &vec![vec![80.0]], &Penalties::default(), &exact()).unwrap();
    assert_abs_diff_eq!(out.ed_cost(), 1000.0, epsilon = 1e-6);
    assert_abs_diff_eq!(out.s1[0] + out.s2[0], 0.0, epsilon = 1e-9);
}

#[test]
fn ed_without_reserve_pays_shortfall() {
    let out = solve_ed(&t1_system(), &t1_plan(), &vec![vec![0.0]], &vec![vec![80.0]], &Penalties::default(), &exact()).unwrap();
    assert_abs_diff_eq!(out.p[0][0], 50.0, epsilon = 1e-6);
    assert_abs_diff_eq!(out.s1[0], 30.0, epsilon = 1e-6);
    assert_abs_diff_eq!(out.cost_slack, 60000.0, epsilon = 1e-4);
    assert_abs_diff_eq!(out.cost_generation, 1000.0, epsilon = 1e-6);
    assert_abs_diff_eq!(out.ed_cost(), 61000.0, epsilon = 1e-4);
}

#[test]
fn all_off_plan_is_covered_by_slack() {
    let sys = t1_system();
    let mut plan = t1_plan();
    plan.i[0][0] = false;
    plan.u[0][0] = false;
    plan.p[0][0] = 0.0;
    plan.psg[0][0] = vec![0.0];
    let pen = Penalties { shortfall: 1234.0, ..Penalties::default() };
    let out = solve_ed(&sys, &plan, &vec![vec![0.0]], &vec![vec![80.0]], &pen, &exact()).unwrap();
    assert_abs_diff_eq!(out.ed_cost(), 80.0 * 1234.0, epsilon = 1e-6);
    assert_eq!(out.s2[0], 0.0);
}

#[test]
fn actual_cost_examples() {
    let r = CostReport { startup: 1.1e3, noload: 2.1e3, ed_startup: 0.1e3, ed_noload: 0.1e3, generation: 237.9e3, slack: 0.0 };
    assert_abs_diff_eq!(r.actual_uc_cost(), 3.2e3, epsilon = 1e-9);
    assert_abs_diff_eq!(r.hindsight_ed_cost(), 238.1e3, epsilon = 1e-9);
    assert_abs_diff_eq!(r.total(), 241.3e3, epsilon = 1e-9);
    assert_eq!(CostReport::default().total(), 0.0);
    let res = run_open_loop(&t1_system(), &t1_scenario(30.0, 30.0), &Penalties::default(), &exact()).unwrap();
    assert_abs_diff_eq!(res.report.total(), 1150.0, epsilon = 1e-6);
}

#[test]
fn over_available_res_is_curtailed() {
    let res = run_open_loop(&t1_system(), &t1_scenario(30.0, 60.0), &Penalties::default(), &exact()).unwrap();
    assert_abs_diff_eq!(res.outcome.w[0][0], 30.0, epsilon = 1e-6);
    assert_abs_diff_eq!(res.report.total(), 1150.0, epsilon = 1e-6);
}

#[test]
fn cost_csv_has_table_columns() {
    let res = run_open_loop(&t1_system(), &t1_scenario(30.0, 0.0), &Penalties::default(), &exact()).unwrap();
    let mut buf = Vec::new();
    write_cost_csv(&mut buf, &[("d1".into(), res.report)]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("day,startup,noload,ed_startup,ed_noload,generation,slack,total\n"));
    assert!(text.contains("d1,100.000000,50.000000,0.000000,0.000000,1000.000000,60000.000000,61150.000000"));
}

fn ieee14() -> PowerSystem {
    load_system(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/ieee14.json")).unwrap()
}

#[test]
fn uc_and_ed_variable_inventory() {
    // uniform segment count
    let sys = two_bus_system();
    let (t, i, j, k) = (sys.horizon(), sys.num_units(), sys.num_res(), 1);
    let inputs = UcInputs::constant(&vec![vec![1.0; j]; t], &zero_reserve(t), &vec![vec![50.0]; t]);
    let st = build_uc(&sys, &inputs, UcOptions::default()).unwrap().model.stats();
    assert_eq!(st.binaries, 4 * t * i);
    assert_eq!(st.continuous, t * (i * (2 + k) + j));

    // mixed segment counts
    let sys = ieee14();
    let t = sys.horizon();
    let seg: usize = sys.thermal_units.iter().map(|u| u.segments.len()).sum();
    let (i, j, b14) = (sys.num_units(), sys.num_res(), sys.branches.len());
    let inputs = UcInputs::constant(&vec![vec![5.0; j]; t], &zero_reserve(t), &vec![vec![10.0; sys.num_loads()]; t]);
    let uc = build_uc(&sys, &inputs, UcOptions::default()).unwrap();
    let st = uc.model.stats();
    assert_eq!(st.binaries, 4 * t * i);
    assert_eq!(st.continuous, t * (2 * i + seg + j));

    let res = solve(&uc.model, &SolveOptions::default()).unwrap();
    let plan = CommitmentPlan::from_solution(&sys, &uc.vars, &res.values);
    let ed = build_ed(&sys, &plan, &vec![vec![5.0; j]; t], &vec![vec![10.0; sys.num_loads()]; t], &Penalties::default()).unwrap();
    let st = ed.model.stats();
    assert_eq!(st.binaries, 4 * t * i);
    assert_eq!(st.continuous, t * (seg + j + 2 + 2 * b14));
}

#[test]
fn fixing_optimal_pattern_reproduces_mip_optimum() {
    let sys = ieee14();
    let t = sys.horizon();
    let load: Matrix = (0..t).map(|h| vec![18.0 + 6.0 * ((h as f64) / 4.0).sin(); sys.num_loads()]).collect();
    let res_pred: Matrix = (0..t).map(|h| vec![20.0 + h as f64, 5.0]).collect();
    let reserve: Vec<ReserveRequirement> = (0..t).map(|_| ReserveRequirement { sr: 20.0, nr: 20.0 }).collect();
    let uc = build_uc(&sys, &UcInputs::constant(&res_pred, &reserve, &load), UcOptions::default()).unwrap();
    let mip = solve(&uc.model, &SolveOptions::with_gap(1e-6)).unwrap();
    assert!(mip.is_optimal());
    let lp = fix_binaries(&uc.model, &integer_assignment(&uc.model, &mip.values)).unwrap();
    let r = solve(&lp.lp, &exact()).unwrap();
    assert!(((r.objective - mip.objective) / mip.objective).abs() < 1e-6, "{} vs {}", r.objective, mip.objective);
}

#[test]
fn min_up_and_ramp_limits_hold_over_a_day() {
    let sys = ieee14();
    let t = sys.horizon();
    let load: Matrix = (0..t).map(|h| vec![if h % 6 < 3 { 10.0 } else { 40.0 }; sys.num_loads()]).collect();
    let plan = solve_uc(&sys, &vec![vec![0.0, 0.0]; t], &zero_reserve(t), &load, &SolveOptions::default()).unwrap();
    plan.check(&sys).unwrap();
    for (k, g) in sys.thermal_units.iter().enumerate() {
        for h in 0..t {
            if plan.u[h][k] {
                let end = (h + g.min_up).min(t);
                assert!((h..end).all(|s| plan.i[s][k]), "{} violates min up at {h}", g.id);
            }
            let prev = if h == 0 { g.initial_status.output_mw } else { plan.p[h - 1][k] };
            let prev_on = if h == 0 { g.initial_status.committed } else { plan.i[h - 1][k] };
            if plan.i[h][k] && prev_on {
                assert!(plan.p[h][k] - prev <= g.ramp_up + 1e-6);
                assert!(prev - plan.p[h][k] <= g.ramp_down + 1e-6);
            }
        }
    }
}

#[test]
fn quick_start_unit_covers_ed_shortfall() {
    // the cheap unit has no spinning capability, so the peak unit must hold
    // NR in the plan and is started in dispatch when RES fails
    let mut sys = two_bus_system();
    sys.thermal_units[0].sr_max = 0.0;
    let t = sys.horizon();
    let reserve = vec![ReserveRequirement { sr: 0.0, nr: 20.0 }; t];
    let plan = solve_uc(&sys, &vec![vec![20.0]; t], &reserve, &vec![vec![35.0]; t], &exact()).unwrap();
    assert!(plan.i.iter().all(|r| r[0] && !r[1]));
    assert!(plan.o.iter().all(|r| r[1]));
    let out = solve_ed(&sys, &plan, &vec![vec![0.0]; t], &vec![vec![35.0]; t], &Penalties::default(), &exact()).unwrap();
    assert!(out.i_qs.iter().all(|r| r[1]));
    assert!(out.s1.iter().all(|s| *s < 1e-6));
    // startup once, no-load each hour
    assert_abs_diff_eq!(out.cost_qs_startup, 40.0, epsilon = 1e-9);
    assert_abs_diff_eq!(out.cost_qs_noload, 10.0 * t as f64, epsilon = 1e-9);
}

#[test]
fn line_limit_triggers_flow_slack_when_plan_is_stuck() {
    let sys = two_bus_system();
    let t = sys.horizon();
    // the plan routes at most 40 MW over the line; dispatch must meet extra load at bus 2
    let plan = solve_uc(&sys, &vec![vec![0.0]; t], &zero_reserve(t), &vec![vec![60.0]; t], &exact()).unwrap();
    assert!(plan.p.iter().all(|r| r[0] <= 40.0 + 1e-6));
    let out = solve_ed(&sys, &plan, &vec![vec![0.0]; t], &vec![vec![60.0]; t], &Penalties::default(), &exact()).unwrap();
    assert!(out.s3.iter().flatten().chain(out.s4.iter().flatten()).all(|s| *s < 1e-6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ed_cost_nonincreasing_in_available_res(a in 0.0f64..100.0, b in 0.0f64..100.0, w_hat in 0.0f64..70.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let sys = t1_system();
        let plan = solve_uc(&sys, &vec![vec![w_hat]], &zero_reserve(1), &vec![vec![80.0]], &exact()).unwrap();
        let pen = Penalties::default();
        let c_lo = solve_ed(&sys, &plan, &vec![vec![lo]], &vec![vec![80.0]], &pen, &exact()).unwrap().ed_cost();
        let c_hi = solve_ed(&sys, &plan, &vec![vec![hi]], &vec![vec![80.0]], &pen, &exact()).unwrap().ed_cost();
        prop_assert!(c_hi <= c_lo + 1e-6);
    }

    #[test]
    fn any_valid_plan_dispatches(
        on in prop::collection::vec(any::<bool>(), 4),
        nr in prop::collection::vec(any::<bool>(), 4),
        frac in prop::collection::vec(0.0f64..1.0, 12),
        w in 0.0f64..80.0,
        load in 0.0f64..150.0,
    ) {
        let sys = two_bus_system();
        let (t, ni) = (sys.horizon(), sys.num_units());
        let mut plan = solve_uc(&sys, &vec![vec![0.0]; t], &zero_reserve(t), &vec![vec![30.0]; t], &exact()).unwrap();
        for h in 0..t {
            for (k, g) in sys.thermal_units.iter().enumerate() {
                let i = on[h * ni + k];
                let prev = if h == 0 { g.initial_status.committed } else { plan.i[h - 1][k] };
                plan.i[h][k] = i;
                plan.u[h][k] = i && !prev;
                plan.d[h][k] = !i && prev;
                plan.o[h][k] = g.quick_start && !i && nr[h * ni + k];
                let p = if i { g.p_min + frac[h * ni + k] * (g.p_max - g.p_min) } else { 0.0 };
                plan.p[h][k] = p;
                plan.psg[h][k] = vec![p];
                plan.rsr[h][k] = if i { frac[4 + h * ni + k] * (g.p_max - p).min(g.sr_max) } else { 0.0 };
                plan.rnr[h][k] = if plan.o[h][k] { g.p_min + frac[8 + h * ni + k] * (g.nr_max - g.p_min) } else { 0.0 };
            }
        }
        plan.check(&sys).unwrap();
        let out = solve_ed(&sys, &plan, &vec![vec![w]; t], &vec![vec![load]; t], &Penalties::default(), &exact());
        prop_assert!(out.is_ok(), "{:?}", out.err());
        let rep = CostReport::new(&plan, &out.unwrap());
        prop_assert_eq!(rep.total(), rep.actual_uc_cost() + rep.hindsight_ed_cost());
    }

    #[test]
    fn perfect_information_replays_uc(w in 0.0f64..80.0, load in 20.0f64..150.0) {
        let sys = two_bus_system();
        let t = sys.horizon();
        let mut sc = flat_scenario(&sys, "p", w, w, load);
        sc.raw_reserve = vec![ReserveRequirement { sr: 5.0, nr: 5.0 }; t];
        let res = match run_open_loop(&sys, &sc, &Penalties::default(), &exact()) {
            Ok(r) => r,
            Err(OpsError::UcInfeasible(_)) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let slack_free = res.outcome.cost_slack < 1e-9;
        if slack_free {
            prop_assert!(res.outcome.cost_generation <= res.plan.cost_generation + 1e-6);
        }
    }
}

#[test]
fn binaries_listing_covers_all_integer_columns() {
    let sys = ieee14();
    let t = sys.horizon();
    let uc = build_uc(
        &sys,
        &UcInputs::constant(&vec![vec![0.0; 2]; t], &zero_reserve(t), &vec![vec![1.0; 11]; t]),
        UcOptions::default(),
    )
    .unwrap();
    let listed: Vec<VarId> = uc.vars.binaries();
    assert_eq!(listed.len(), uc.model.integer_vars().count());
}
