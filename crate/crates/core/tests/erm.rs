use std::time::Instant;

use copo::data::{OperationScenario, PowerSystem};
use copo::erm::*;
use copo::fixtures::*;
use copo::milp::{solve, SolveOptions};
use copo::ops::{run_open_loop, solve_ed, OpsError, Penalties};
use copo::predictors::{AffinePredictorPair, PredictorStructure, ReserveMapping, TrainTarget};
use proptest::prelude::*;

fn grid() -> Vec<f64> {
    (0..=30).map(|k| k as f64 * 0.05).collect()
}

/// Scalar RES multiplier in [0, 1.5], reserve map pinned, no regularization.
fn scalar_config(scenarios: Vec<OperationScenario>, alpha: f64) -> TrainingConfig {
    let mut c = TrainingConfig::new(scenarios);
    c.structure = PredictorStructure {
        scalar_m: true,
        target: TrainTarget::ResOnly,
        multiplier_cap: Some(1.5),
        alpha,
        ..Default::default()
    };
    c.lambda_w = 0.0;
    c.lambda_r = 0.0;
    c.solver = SolveOptions::with_gap(1e-6);
    c.sp2_tolerance = Some(1e-4);
    c
}

fn ccg_config() -> TrainingConfig {
    let mut c = TrainingConfig::new(ccg_days());
    c.structure = PredictorStructure { alpha: CCG_ALPHA, multiplier_cap: Some(2.0), ..Default::default() };
    c.lambda_w = 1.0;
    c.lambda_r = 1.0;
    c.solver = SolveOptions::with_gap(1e-6);
    c.sp2_tolerance = Some(1e-4);
    c
}

fn identity(system: &PowerSystem, alpha: f64) -> AffinePredictorPair {
    AffinePredictorPair::identity(system.horizon(), system.num_res(), alpha, ReserveMapping::Split)
}

#[test]
fn sp1_with_identity_is_the_open_loop_commitment() {
    let sys = t1_system();
    let day = t1_scenario(40.0, 40.0);
    let exact = SolveOptions::exact();
    let sp1 = solve_sp1(&sys, &day, &identity(&sys, 0.0), &exact).unwrap();
    let open = run_open_loop(&sys, &day, &Penalties::default(), &exact).unwrap();
    assert_eq!(sp1.plan, open.plan);
    assert!((sp1.anticipated_cost - 950.0).abs() < 1e-6);
}

#[test]
fn sp1_with_zero_res_multiplier_covers_load_thermally() {
    // P = 80 at $20 plus start-up 100 and no-load 50
    let sys = t1_system();
    let pair = AffinePredictorPair::zero(1, 1, ReserveMapping::Split);
    let sp1 = solve_sp1(&sys, &t1_scenario(80.0, 40.0), &pair, &SolveOptions::exact()).unwrap();
    assert!((sp1.anticipated_cost - 1750.0).abs() < 1e-6);
    assert!((sp1.plan.p[0][0] - 80.0).abs() < 1e-6);
    assert_eq!(sp1.plan.w[0][0], 0.0);
}

#[test]
fn sp1_reports_infeasible_reserve_with_the_scenario() {
    let sys = t1_system();
    let mut pair = identity(&sys, 0.0);
    pair.n[0] = vec![0.0, 20.0]; // 1600 MW against 100 MW of capacity
    match solve_sp1(&sys, &t1_scenario(40.0, 40.0), &pair, &SolveOptions::exact()) {
        Err(ErmError::Scenario { scenario, source: OpsError::UcInfeasible(_) }) => assert_eq!(scenario, "t1"),
        other => panic!("expected an infeasibility naming the scenario, got {other:?}"),
    }
}

#[test]
fn sp2_keeps_a_unique_commitment() {
    let sys = t1_system();
    let day = t1_scenario(40.0, 40.0);
    let exact = SolveOptions::exact();
    let pair = identity(&sys, 0.0);
    let sp1 = solve_sp1(&sys, &day, &pair, &exact).unwrap();
    let sp2 = solve_sp2(&sys, &day, &pair, sp1.anticipated_cost, 1e-4, &Penalties::default(), &exact).unwrap();
    assert_eq!(sp2.plan.i, sp1.plan.i);
    let ed = solve_ed(&sys, &sp1.plan, &day.actual_res, &day.actual_load, &Penalties::default(), &exact).unwrap();
    assert!((sp2.actual_cost - (sp1.plan.commitment_cost() + ed.ed_cost())).abs() < 1e-6);
    assert!((sp2.actual_cost - 950.0).abs() < 1e-6);
}

#[test]
fn sp2_breaks_ties_toward_the_cheaper_dispatch() {
    // ga and gb tie at 1150 day-ahead; only ga can ramp to 60 MW when the
    // RES fails, gb is capped at 55 MW and sheds 5 MW at $2000
    let sys = tie_system();
    let day = flat_scenario(&sys, "tie", 10.0, 0.0, 60.0);
    let exact = SolveOptions::exact();
    let pair = identity(&sys, 0.0);
    let sp1 = solve_sp1(&sys, &day, &pair, &exact).unwrap();
    assert!((sp1.anticipated_cost - 1150.0).abs() < 1e-6);
    let sp2 = solve_sp2(&sys, &day, &pair, sp1.anticipated_cost, 1e-4, &Penalties::default(), &exact).unwrap();
    assert_eq!(sp2.plan.i, vec![vec![true, false]]);
    assert!((sp2.actual_cost - 1350.0).abs() < 1e-6);

    // enumeration oracle over both single-unit patterns
    let config = {
        let mut c = scalar_config(vec![day.clone()], 0.0);
        c.solver = exact;
        c
    };
    let brute = brute_force_erm(&sys, &config, &pair).unwrap();
    assert!((brute.average_cost - 1350.0).abs() < 1e-6);
}

#[test]
fn sp2_without_cap_is_a_relaxation() {
    let sys = tie_system();
    let day = flat_scenario(&sys, "tie", 30.0, 5.0, 120.0);
    let exact = SolveOptions::exact();
    let pair = identity(&sys, 0.0);
    let pen = Penalties::default();
    let sp1 = solve_sp1(&sys, &day, &pair, &exact).unwrap();
    let capped = solve_sp2(&sys, &day, &pair, sp1.anticipated_cost, 1e-4, &pen, &exact).unwrap();
    let free = solve_sp2(&sys, &day, &pair, sp1.anticipated_cost, f64::INFINITY, &pen, &exact).unwrap();
    let ed = solve_ed(&sys, &sp1.plan, &day.actual_res, &day.actual_load, &pen, &exact).unwrap();
    assert!(free.actual_cost <= capped.actual_cost + 1e-6);
    assert!(free.actual_cost <= sp1.plan.commitment_cost() + ed.ed_cost() + 1e-6);
}

#[test]
fn patterns_are_enumerated_with_consistent_transitions() {
    assert_eq!(enumerate_patterns(&t1_system()).unwrap().len(), 2);
    // cheap: on/off, peak: on/off/non-spinning, over two hours
    let sys = two_bus_system();
    let pats = enumerate_patterns(&sys).unwrap();
    assert_eq!(pats.len(), 36);
    for p in &pats {
        let mut prev = [false, false];
        for (k, chunk) in p.0.chunks(4).enumerate() {
            let unit = k % 2;
            let [i, u, d, o] = [chunk[0], chunk[1], chunk[2], chunk[3]];
            assert_eq!(u, i && !prev[unit]);
            assert_eq!(d, !i && prev[unit]);
            assert!(!(o && i));
            prev[unit] = i;
        }
    }
    let big = copo::data::load_system(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/ieee14.json")).unwrap();
    assert!(matches!(enumerate_patterns(&big), Err(ErmError::TooLarge(_))));
}

#[test]
fn master_with_pinned_incumbent_equals_the_evaluated_cost() {
    // identity over-predicts 2x: no commitment and 40 MW shed at $2000
    let sys = t1_system();
    let mut config = scalar_config(vec![t1_scenario(80.0, 40.0)], 0.0);
    config.solver = SolveOptions::exact();
    let eval = evaluate_pair(&sys, &config, &config.initial_pair(&sys)).unwrap();
    assert!((eval.average_cost - 80_000.0).abs() < 1e-6);
    let mut master = build_master(&sys, &config, &[vec![eval.scenarios[0].sp2.pattern.clone()]]).unwrap();
    let m = master.predictor.m[0][0];
    master.model.variables[m.0].lower = 1.0;
    master.model.variables[m.0].upper = 1.0;
    let r = solve(&master.model, &config.solver).unwrap();
    assert!((r.objective - eval.objective).abs() < 1e-4);
}

#[test]
fn master_with_every_pattern_reaches_the_grid_optimum() {
    let sys = t1_system();
    let mut config = scalar_config(vec![t1_scenario(80.0, 40.0)], 0.0);
    config.solver = SolveOptions::exact();
    let all = enumerate_patterns(&sys).unwrap();
    let master = build_master(&sys, &config, &[all]).unwrap();
    let r = solve(&master.model, &config.solver).unwrap();
    let g = grid_search(&sys, &config, &grid()).unwrap();
    assert!((g.best.objective - 950.0).abs() < 1e-6);
    assert!((r.objective - g.best.objective).abs() < 1e-4, "master {} grid {}", r.objective, g.best.objective);
}

#[test]
fn master_needs_a_cut_per_scenario() {
    let config = scalar_config(vec![t1_scenario(80.0, 40.0)], 0.0);
    assert!(matches!(build_master(&t1_system(), &config, &[vec![]]), Err(ErmError::Config(_))));
}

#[test]
fn training_recovers_the_grid_optimum_on_doubled_predictions() {
    let sys = t1_system();
    let config = scalar_config(vec![t1_scenario(80.0, 40.0)], 0.0);
    let (pair, state) = train(&sys, &config).unwrap();
    let g = grid_search(&sys, &config, &grid()).unwrap();
    let trained = evaluate_pair(&sys, &config, &pair).unwrap();
    assert!(trained.average_cost <= g.best.average_cost * 1.01);
    // any m in [0.125, 0.6875] lets the dispatch use all 40 MW of RES
    let m = pair.m[0][0];
    assert!((0.125 - 1e-6..=0.6875 + 1e-6).contains(&m), "m = {m}");
    assert_eq!(state.status, TrainingStatus::Converged);
}

#[test]
fn training_on_exact_predictions_converges_at_once() {
    let sys = bias_system();
    let config = scalar_config(identity_optimal_days(), 0.0);
    let (pair, state) = train(&sys, &config).unwrap();
    assert_eq!(state.status, TrainingStatus::Converged);
    assert!(state.iteration <= 2);
    let g = grid_search(&sys, &config, &grid()).unwrap();
    assert!((state.log[0].ub - g.best.objective).abs() <= 1e-6 * g.best.objective);
    assert!((pair.m[0][0] - 1.0).abs() < 1e-6);
}

#[test]
fn iteration_limit_of_one_stops_after_one_master() {
    let sys = ccg_system();
    let mut config = ccg_config();
    config.max_iterations = 1;
    let (_, state) = train(&sys, &config).unwrap();
    assert_eq!(state.iteration, 1);
    assert_eq!(state.status, TrainingStatus::IterationLimit);
    assert!(state.lb <= state.ub);
}

#[test]
fn bounds_are_monotone_and_cuts_sound() {
    let sys = ccg_system();
    let config = ccg_config();
    let (_, state) = train(&sys, &config).unwrap();
    assert!(state.iteration >= 2, "fixture should need several master solves");
    assert_eq!(state.status, TrainingStatus::Converged);
    for w in state.log.windows(2) {
        assert!(w[1].lb >= w[0].lb);
        assert!(w[1].ub <= w[0].ub);
    }
    for l in &state.log {
        assert!(l.lb <= l.ub + config.solver.gap * l.ub.abs());
    }

    // re-solve the final master and check every cut at its optimum
    let master = build_master(&sys, &config, &state.cuts).unwrap();
    let r = solve(&master.model, &config.solver).unwrap();
    assert!(master.cut_violation(&r.values) <= 1e-6 * r.objective.abs().max(1.0));
    assert!(master.kkt_soundness(&sys, &config, &r.values).unwrap() <= 1e-5);
    assert_eq!(master.binding_big_m(&r.values, copo::milp::BIG_M_BINDING_TOL), 0);
}

#[test]
fn regularization_tilts_the_multipliers() {
    let sys = ccg_system();
    let sum_m = |lw: f64| {
        let mut c = ccg_config();
        c.lambda_w = lw;
        train(&sys, &c).unwrap().0.l1_res()
    };
    assert!(sum_m(200.0) <= sum_m(0.0) + 1e-6);
    let sum_n = |lr: f64| {
        let mut c = ccg_config();
        c.lambda_r = lr;
        train(&sys, &c).unwrap().0.l1_reserve()
    };
    assert!(sum_n(200.0) >= sum_n(0.0) - 1e-6);
}

#[test]
fn enumeration_holds_on_tiny_instances() {
    let start = Instant::now();
    for inst in tiny_instances() {
        let config = scalar_config(inst.scenarios.clone(), 0.0);
        let report = verify_enumeration(&inst.system, &config, &grid()).unwrap();
        assert!(report.agrees, "{}: {report:?}", inst.name);
        assert!(report.relative_difference <= 0.01);
    }
    assert!(start.elapsed().as_secs() < 120);
}

#[test]
fn enumeration_with_regularization() {
    let mut config = scalar_config(vec![t1_scenario(80.0, 40.0)], 0.0);
    config.lambda_w = 10.0;
    let report = verify_enumeration(&t1_system(), &config, &grid()).unwrap();
    assert!(report.agrees, "{report:?}");
    // regularization pushes m to the low end of the flat band
    assert!((report.brute_force.m - 0.15).abs() < 1e-9);
}

#[test]
fn enumeration_is_exact_when_dispatch_is_unique() {
    // without spinning reserve the dispatch follows the schedule exactly
    let sys = bias_system();
    let config = scalar_config(bias_doubled_days()[..2].to_vec(), 0.0);
    let report = verify_enumeration(&sys, &config, &grid()).unwrap();
    assert!(report.relative_difference <= 1e-6, "{report:?}");
}

#[test]
fn enumeration_refuses_large_instances() {
    let big = copo::data::load_system(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/ieee14.json")).unwrap();
    let day = OperationScenario {
        id: "d".into(),
        raw_res_prediction: vec![vec![10.0; 2]; 24],
        actual_res: vec![vec![10.0; 2]; 24],
        raw_load_prediction: vec![vec![10.0; 11]; 24],
        actual_load: vec![vec![10.0; 11]; 24],
        raw_reserve: vec![Default::default(); 24],
    };
    let config = scalar_config(vec![day], 0.0);
    assert!(matches!(verify_enumeration(&big, &config, &grid()), Err(ErmError::TooLarge(_))));
}

#[test]
fn training_log_is_written_as_csv() {
    let sys = ccg_system();
    let (_, state) = train(&sys, &ccg_config()).unwrap();
    let mut buf = Vec::new();
    write_training_log(&mut buf, &state.log).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,lb,ub,gap,wall_seconds,cuts_total"));
    assert_eq!(lines.count(), state.log.len());
}

#[test]
fn configuration_is_validated() {
    let sys = t1_system();
    let mut c = scalar_config(vec![], 0.0);
    assert!(matches!(c.validate(&sys), Err(ErmError::Config(_))));
    c.scenarios = vec![t1_scenario(80.0, 40.0)];
    c.max_iterations = 0;
    assert!(c.validate(&sys).is_err());
    c.max_iterations = 3;
    c.gap_target = 0.0;
    assert!(c.validate(&sys).is_err());
    c.gap_target = 0.01;
    assert!(c.validate(&sys).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// The tie-break never does worse than dispatching the first-stage plan.
    #[test]
    fn sp2_improves_on_the_sp1_plan(w_hat in 0.0..80.0f64, w_tilde in 0.0..80.0f64, load in 40.0..150.0f64, m in 0.0..1.5f64) {
        let sys = tie_system();
        let day = flat_scenario(&sys, "p", w_hat, w_tilde, load);
        let exact = SolveOptions::exact();
        let mut pair = identity(&sys, 0.0);
        pair.m[0][0] = m;
        let pen = Penalties::default();
        let sp1 = solve_sp1(&sys, &day, &pair, &exact).unwrap();
        let sp2 = solve_sp2(&sys, &day, &pair, sp1.anticipated_cost, 1e-4, &pen, &exact).unwrap();
        let ed = solve_ed(&sys, &sp1.plan, &day.actual_res, &day.actual_load, &pen, &exact).unwrap();
        let plain = sp1.plan.commitment_cost() + ed.ed_cost();
        prop_assert!(sp2.actual_cost <= plain + 1e-6 * plain.max(1.0));
    }

    /// Tie-break and enumeration agree at arbitrary predictors.
    #[test]
    fn sp2_matches_enumeration(w_hat in 0.0..80.0f64, w_tilde in 0.0..80.0f64, load in 40.0..150.0f64, m in 0.0..1.5f64) {
        let sys = tie_system();
        let mut config = scalar_config(vec![flat_scenario(&sys, "p", w_hat, w_tilde, load)], 0.0);
        config.solver = SolveOptions::exact();
        let pair = scalar_m_pair(&sys, &config.structure, m);
        let joint = evaluate_pair(&sys, &config, &pair).unwrap();
        let brute = brute_force_erm(&sys, &config, &pair).unwrap();
        prop_assert!((joint.objective - brute.objective).abs() <= 1e-6 * brute.objective.abs().max(1.0));
    }
}
