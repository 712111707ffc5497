use approx::assert_abs_diff_eq;
use copo::data::{rule_of_thumb_reserve, ReserveRequirement};
use copo::fixtures::{flat_scenario, two_bus_system};
use copo::milp::{solve, SolveOptions};
use copo::ops::{solve_uc, UcInputs, UcOptions};
use copo::predictors::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

#[test]
fn identity_and_zero_res_predictions() {
    let w = vec![vec![30.0, 12.5], vec![0.0, 7.0]];
    let id = AffinePredictorPair::identity(2, 2, 0.5, ReserveMapping::Split);
    assert_eq!(id.predict_res(&w).unwrap(), w);
    let z = AffinePredictorPair::zero(2, 2, ReserveMapping::Split);
    assert!(z.predict_res(&w).unwrap().iter().flatten().all(|v| *v == 0.0));
    let mut half = id.clone();
    half.m[0][0] = 0.5;
    assert_eq!(half.predict_res(&w).unwrap()[0][0], 15.0);
    assert!(id.predict_res(&vec![vec![1.0]]).is_err());
}

#[test]
fn reserve_predictions() {
    let z = AffinePredictorPair::zero(1, 1, ReserveMapping::Split);
    assert_eq!(z.predict_reserve(&[(100.0, 400.0)]).unwrap()[0], ReserveRequirement::default());
    let mut p = z.clone();
    p.n[0] = vec![0.1, 0.05];
    let r = p.predict_reserve(&[(100.0, 400.0)]).unwrap()[0];
    assert_abs_diff_eq!(r.total(), 30.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.sr, 15.0, epsilon = 1e-12);
    let mut q = AffinePredictorPair::zero(1, 1, ReserveMapping::Independent);
    q.n[0] = vec![0.1, 0.0, 0.0, 0.05];
    let r = q.predict_reserve(&[(100.0, 400.0)]).unwrap()[0];
    assert_eq!((r.sr, r.nr), (10.0, 20.0));
}

#[test]
fn identity_replicates_rule_of_thumb() {
    let load = vec![vec![226.4, 226.4]; 24];
    let rot = rule_of_thumb_reserve(&load, 0.5).unwrap();
    for mapping in [ReserveMapping::Split, ReserveMapping::Independent] {
        let id = AffinePredictorPair::identity(24, 1, 0.5, mapping);
        let feats: Vec<(f64, f64)> = load.iter().map(|r| (80.0, r.iter().sum())).collect();
        let pred = id.predict_reserve(&feats).unwrap();
        for (a, b) in pred.iter().zip(&rot) {
            assert_abs_diff_eq!(a.sr, b.sr, epsilon = 1e-9);
            assert_abs_diff_eq!(a.nr, b.nr, epsilon = 1e-9);
        }
    }
}

#[test]
fn json_round_trips_bit_exact() {
    let id = AffinePredictorPair::identity(3, 2, 0.5, ReserveMapping::Split);
    assert_eq!(AffinePredictorPair::from_json_str(&id.to_json_string().unwrap()).unwrap(), id);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut p = AffinePredictorPair::zero(24, 3, ReserveMapping::Independent);
    for v in p.m.iter_mut().chain(p.n.iter_mut()).flatten() {
        *v = rng.gen::<f64>() * 3.0;
    }
    p.metadata.training_days = vec!["2024-01-01".into()];
    p.metadata.erm_objective = Some(1.0 / 3.0);
    let back = AffinePredictorPair::from_json_str(&p.to_json_string().unwrap()).unwrap();
    for (a, b) in back.m.iter().flatten().chain(back.n.iter().flatten()).zip(p.m.iter().flatten().chain(p.n.iter().flatten())) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert_eq!(back, p);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pred.json");
    p.save(&path).unwrap();
    assert_eq!(AffinePredictorPair::load(&path).unwrap(), p);
}

#[test]
fn schema_violations_are_rejected() {
    let id = AffinePredictorPair::identity(1, 1, 0.5, ReserveMapping::Split);
    let text = id.to_json_string().unwrap().replacen("\"1\"", "\"-1\"", 1);
    assert!(matches!(AffinePredictorPair::from_json_str(&text), Err(PredictorError::Invalid(_))));
    assert!(AffinePredictorPair::from_json_str(r#"{"horizon":1,"res_count":1,"m":[["x"]],"n":[["0","0"]]}"#).is_err());
    assert!(AffinePredictorPair::from_json_str(r#"{"horizon":1,"res_count":1,"m":[["1"]],"n":[["0","0","0"]]}"#).is_err());
}

#[test]
fn identity_embedding_matches_deterministic_uc() {
    // the UC with predictor columns pinned at the identity has the same optimum
    let sys = two_bus_system();
    let t = sys.horizon();
    let mut sc = flat_scenario(&sys, "d", 25.0, 25.0, 70.0);
    sc.raw_reserve = rule_of_thumb_reserve(&sc.raw_load_prediction, 0.2).unwrap();
    let plan = solve_uc(&sys, &sc.raw_res_prediction, &sc.raw_reserve, &sc.raw_load_prediction, &SolveOptions::exact()).unwrap();

    let s = PredictorStructure { target: TrainTarget::Both, alpha: 0.2, ..Default::default() };
    let mut model = copo::milp::LinearModel::new();
    let pv = PredictorVars::add_to(&mut model, t, 1, &s);
    let id = AffinePredictorPair::identity(t, 1, 0.2, ReserveMapping::Split);
    for (row, vals) in pv.m.iter().chain(pv.n.iter()).zip(id.m.iter().chain(id.n.iter())) {
        for (v, x) in row.iter().zip(vals) {
            model.variables[v.0].lower = *x;
            model.variables[v.0].upper = *x;
        }
    }
    let (sr, nr) = pv.reserve(&sc.features_reserve());
    let inputs = UcInputs { res_cap: pv.res_cap(sc.features_res()), sr_req: sr, nr_req: nr, load: sc.raw_load_prediction.clone() };
    let vars = copo::ops::build_uc_into(&mut model, &sys, &inputs, UcOptions::default()).unwrap();
    model.add_objective(&vars.anticipated_cost());
    let r = solve(&model, &SolveOptions::exact()).unwrap();
    assert_abs_diff_eq!(r.objective, plan.anticipated_cost(), epsilon = 1e-6);
}

proptest! {
    #[test]
    fn res_prediction_is_homogeneous(m in prop::collection::vec(0.0f64..3.0, 4), w in prop::collection::vec(0.0f64..200.0, 4), c in 0.0f64..10.0) {
        let mut p = AffinePredictorPair::zero(2, 2, ReserveMapping::Split);
        p.m = vec![m[..2].to_vec(), m[2..].to_vec()];
        let w = vec![w[..2].to_vec(), w[2..].to_vec()];
        let scaled: Vec<Vec<f64>> = w.iter().map(|r| r.iter().map(|x| c * x).collect()).collect();
        let a = p.predict_res(&scaled).unwrap();
        let b = p.predict_res(&w).unwrap();
        for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
            prop_assert!((x - c * y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn random_pair_round_trips(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut p = AffinePredictorPair::zero(4, 2, ReserveMapping::Split);
        for v in p.m.iter_mut().chain(p.n.iter_mut()).flatten() {
            *v = rng.gen::<f64>() * 1e3;
        }
        prop_assert_eq!(AffinePredictorPair::from_json_str(&p.to_json_string().unwrap()).unwrap(), p);
    }
}
