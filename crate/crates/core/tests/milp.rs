use std::collections::BTreeMap;

use copo::fixtures::{t1_scenario, t1_system, tie_system, flat_scenario};
use copo::milp::*;
use copo::ops::{build_uc, UcInputs, UcOptions};
use proptest::prelude::*;

#[test]
fn kkt_equivalence_on_the_seeded_corpus() {
    for seed in 0..50 {
        let lp = random_lp(seed);
        assert!(lp.num_vars() <= 10 && lp.num_constraints() <= 15);
        let check = kkt_equivalence(&lp, DEFAULT_BIG_M).unwrap();
        assert!(check.passed(1e-6), "seed {seed}: {check:?}");
    }
}

#[test]
fn tiny_big_m_cuts_the_sentinel_optimum() {
    let ok = kkt_equivalence(&big_m_sentinel_lp(), DEFAULT_BIG_M).unwrap();
    assert!(ok.passed(1e-6));
    assert!((ok.direct - 26.0).abs() < 1e-9);
    let bad = kkt_equivalence(&big_m_sentinel_lp(), 1.0).unwrap();
    assert!(!bad.passed(1e-6), "{bad:?}");
}

#[test]
fn strong_duality_on_the_corpus() {
    for seed in 0..50 {
        let lp = random_lp(seed);
        let r = solve(&lp, &SolveOptions::exact()).unwrap();
        let duals = r.duals.as_ref().expect("LP duals");
        let dual = duals.dual_objective(&lp);
        assert!((dual - r.objective).abs() <= 1e-6 * r.objective.abs().max(1.0), "seed {seed}");
    }
}

#[test]
fn fixing_an_optimal_pattern_keeps_the_optimum() {
    for (sys, day) in [(t1_system(), t1_scenario(30.0, 30.0)), (tie_system(), flat_scenario(&tie_system(), "d", 40.0, 40.0, 130.0))] {
        let uc = build_uc(&sys, &UcInputs::constant(&day.raw_res_prediction, &day.raw_reserve, &day.raw_load_prediction), UcOptions::default())
            .unwrap();
        let mip = solve(&uc.model, &SolveOptions::exact()).unwrap();
        let fixed = fix_binaries(&uc.model, &integer_assignment(&uc.model, &mip.values)).unwrap();
        let lp = solve(&fixed.lp, &SolveOptions::exact()).unwrap();
        assert!((lp.objective - mip.objective).abs() <= 1e-6 * mip.objective.abs().max(1.0));
    }
}

proptest! {
    /// A feasible point that agrees with the assignment stays feasible once
    /// the binaries are folded into the rows.
    #[test]
    fn fixing_preserves_feasible_points(u in 0..2u8, p in 0.0..10.0f64, q in 0.0..5.0f64) {
        let mut m = LinearModel::new();
        let ub = m.binary("u");
        let pv = m.continuous("p", 0.0, f64::INFINITY);
        let qv = m.continuous("q", 0.0, 5.0);
        m.add_constraint("cap", LinExpr::var(pv) - LinExpr::term(ub, 10.0), Sense::Le, 0.0);
        m.add_constraint("mix", LinExpr::var(pv) + qv + LinExpr::term(ub, 2.0), Sense::Le, 17.0);
        let values = vec![u as f64, if u == 1 { p } else { 0.0 }, q];
        let (viol, _) = m.max_violation(&values);
        prop_assume!(viol <= 1e-9);
        let assignment: BTreeMap<VarId, f64> = [(ub, u as f64)].into_iter().collect();
        let fixed = fix_binaries(&m, &assignment).unwrap();
        let lp_values: Vec<f64> = (0..3).filter_map(|j| fixed.lp_var(VarId(j)).map(|_| values[j])).collect();
        prop_assert!(fixed.lp.max_violation(&lp_values).0 <= 1e-9);
    }
}
