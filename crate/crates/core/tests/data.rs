use approx::assert_abs_diff_eq;
use copo::data::*;
use proptest::prelude::*;

fn unit(id: &str, bus: usize) -> ThermalUnit {
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

fn network(nb: usize, edges: &[(usize, usize, f64)]) -> PowerSystem {
    PowerSystem {
        buses: (0..nb).map(|b| format!("b{b}")).collect(),
        thermal_units: vec![unit("g", 0)],
        res_units: vec![],
        branches: edges
            .iter()
            .enumerate()
            .map(|(k, &(f, t, x))| Branch {
                id: format!("l{k}"),
                from_bus: f,
                to_bus: t,
                capacity_mw: 100.0,
                reactance: x,
                sensitivity_row: None,
            })
            .collect(),
        load_buses: vec![],
        horizon_hours: 1,
    }
}

const MINIMAL: &str = r#"{
  "buses": ["n1"],
  "thermal_units": [{
    "id": "g1", "bus": 0, "quick_start": false, "p_min": 10, "p_max": 100,
    "segments": [{"width_mw": 100, "cost_per_mwh": 20}],
    "startup_cost": 100, "noload_cost": 50, "ramp_up": 100, "ramp_down": 100,
    "startup_ramp": 100, "shutdown_ramp": 100, "min_up": 1, "min_down": 1,
    "sr_max": 100, "nr_max": 0,
    "initial_status": {"committed": false, "output_mw": 0}
  }]
}"#;

#[test]
fn minimal_system_loads() {
    let s = PowerSystem::from_json_str(MINIMAL).unwrap();
    assert_eq!(s.num_units(), 1);
    assert_eq!(s.num_res(), 0);
    assert_eq!(s.branches.len(), 0);
    assert_eq!(s.horizon(), 24);
}

#[test]
fn short_segments_name_the_unit() {
    let bad = MINIMAL.replace(r#""width_mw": 100"#, r#""width_mw": 99"#);
    let err = PowerSystem::from_json_str(&bad).unwrap_err();
    assert!(matches!(err, DataError::Validation(_)));
    assert!(err.to_string().contains("g1"), "{err}");
}

#[test]
fn malformed_json_is_a_parse_error() {
    assert!(matches!(PowerSystem::from_json_str("{ not json"), Err(DataError::Json(_))));
}

#[test]
fn other_invariants_are_enforced() {
    let base = network(2, &[(0, 1, 0.1)]);
    let mut s = base.clone();
    s.thermal_units[0].segments.push(Segment { width_mw: 0.0, cost_per_mwh: 5.0 });
    assert!(s.validate().is_err(), "decreasing segment costs");
    let mut s = base.clone();
    s.thermal_units[0].min_up = 0;
    assert!(s.validate().is_err());
    let mut s = base.clone();
    s.branches[0].capacity_mw = 0.0;
    assert!(s.validate().is_err());
    let mut s = base.clone();
    s.thermal_units[0].bus = 7;
    assert!(s.validate().is_err());
    let mut s = base;
    s.thermal_units.clear();
    assert!(s.validate().is_err());
}

#[test]
fn fourteen_bus_fixture_counts() {
    let s = load_system(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/ieee14.json")).unwrap();
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/ieee14.json")).unwrap();
    let raw: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(s.buses.len(), 14);
    assert_eq!(s.branches.len(), raw["branches"].as_array().unwrap().len());
    assert!(s.has_sensitivities());
}

#[test]
fn two_bus_sensitivity_is_one() {
    let s = build_sensitivities(&network(2, &[(1, 0, 0.2)]), 0).unwrap();
    assert_eq!(s.branches[0].sensitivity(), &[0.0, 1.0]);
}

#[test]
fn triangle_splits_two_thirds_one_third() {
    let s = build_sensitivities(&network(3, &[(0, 1, 0.1), (1, 2, 0.1), (0, 2, 0.1)]), 0).unwrap();
    let rows: Vec<&[f64]> = s.branches.iter().map(|b| b.sensitivity()).collect();
    // injection at bus 1 returns to bus 0 directly (2/3) and via bus 2 (1/3)
    let expect = [[0.0, -2.0 / 3.0, -1.0 / 3.0], [0.0, 1.0 / 3.0, -1.0 / 3.0], [0.0, -1.0 / 3.0, -2.0 / 3.0]];
    for (row, e) in rows.iter().zip(expect) {
        for (a, b) in row.iter().zip(e) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }
}

#[test]
fn disconnected_network_is_rejected() {
    let err = build_sensitivities(&network(4, &[(0, 1, 0.1), (2, 3, 0.1)]), 0).unwrap_err();
    assert!(matches!(err, DataError::Network(_)));
}

#[test]
fn rule_of_thumb_examples() {
    let r = rule_of_thumb_reserve(&[vec![452.8]], 0.5).unwrap();
    assert_abs_diff_eq!(r[0].sr, 113.2, epsilon = 1e-9);
    assert_abs_diff_eq!(r[0].nr, 113.2, epsilon = 1e-9);
    let r = rule_of_thumb_reserve(&[vec![60.0, 40.0]], 0.3).unwrap();
    assert_abs_diff_eq!(r[0].sr, 15.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r[0].nr, 15.0, epsilon = 1e-12);
    let r = rule_of_thumb_reserve(&[vec![100.0]], 0.0).unwrap();
    assert_eq!(r[0], ReserveRequirement { sr: 0.0, nr: 0.0 });
    assert!(rule_of_thumb_reserve(&[vec![1.0]], 1.5).is_err());
}

fn scenario_system() -> PowerSystem {
    let mut s = network(1, &[]);
    s.res_units.push(RenewableUnit { id: "w".into(), bus: 0 });
    s.load_buses.push(0);
    s.horizon_hours = 24;
    s
}

fn scenario_csv(days: usize, skip: Option<(usize, usize)>, res_scale: f64) -> String {
    let mut out = String::from("date,hour,res_w_pred,res_w_actual,load_b0_pred,load_b0_actual\n");
    for d in 0..days {
        for h in 1..=24 {
            if skip == Some((d, h)) {
                continue;
            }
            out += &format!("2024-01-0{},{h},{},{},{},{}\n", d + 1, 10.0 + h as f64, res_scale * 9.0, 80.0, 82.5);
        }
    }
    out
}

#[test]
fn seven_days_of_twenty_four_hours() {
    let sc = read_scenarios(scenario_csv(7, None, 1.0).as_bytes(), &scenario_system(), 0.5).unwrap();
    assert_eq!(sc.len(), 7);
    assert!(sc.iter().all(|s| s.horizon() == 24 && s.actual_load.len() == 24));
    assert_eq!(sc[0].id, "2024-01-01");
    assert_abs_diff_eq!(sc[0].raw_reserve[0].sr, 20.0);
    assert_eq!(sc[2].features_reserve()[0], (11.0, 80.0));
}

#[test]
fn missing_hour_cites_the_date() {
    let err = read_scenarios(scenario_csv(2, Some((1, 13)), 1.0).as_bytes(), &scenario_system(), 0.5).unwrap_err();
    match err {
        DataError::MissingHour { date, hour } => {
            assert_eq!(date, "2024-01-02");
            assert_eq!(hour, 13);
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn res_free_day_is_accepted() {
    let sc = read_scenarios(scenario_csv(1, None, 0.0).as_bytes(), &scenario_system(), 0.5).unwrap();
    assert!(sc[0].actual_res.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn negative_and_mismatched_inputs_fail() {
    let neg = scenario_csv(1, None, -1.0);
    assert!(matches!(read_scenarios(neg.as_bytes(), &scenario_system(), 0.5), Err(DataError::Negative(_))));
    let narrow = "date,hour,res_w_pred\n2024-01-01,1,3\n";
    assert!(matches!(read_scenarios(narrow.as_bytes(), &scenario_system(), 0.5), Err(DataError::Dimension(_))));
}

#[test]
fn scenario_csv_round_trips() {
    let sys = scenario_system();
    let sc = read_scenarios(scenario_csv(3, None, 1.0).as_bytes(), &sys, 0.5).unwrap();
    let mut buf = Vec::new();
    write_scenarios(&mut buf, &sys, &sc).unwrap();
    let back = read_scenarios(buf.as_slice(), &sys, 0.1).unwrap();
    assert_eq!(sc, back);
}

/// Random connected network: a random spanning tree plus extra edges.
fn arb_network() -> impl Strategy<Value = PowerSystem> {
    (2usize..=5)
        .prop_flat_map(|nb| {
            let parents: Vec<_> = (1..nb).map(|b| 0..b).collect();
            let extra = prop::collection::vec((0..nb, 0..nb, 0.05f64..1.0), 0..4);
            let xs = prop::collection::vec(0.05f64..1.0, nb - 1);
            (Just(nb), parents, extra, xs)
        })
        .prop_map(|(nb, parents, extra, xs)| {
            let mut edges: Vec<(usize, usize, f64)> =
                parents.iter().enumerate().map(|(k, &p)| (p, k + 1, xs[k])).collect();
            edges.extend(extra.into_iter().filter(|(a, b, _)| a != b));
            network(nb, &edges)
        })
}

proptest! {
    #[test]
    fn ptdf_flows_conserve_power(sys in arb_network(), pick in 0usize..64) {
        let nb = sys.buses.len();
        let s = build_sensitivities(&sys, 0).unwrap();
        let br = &s.branches[pick % s.branches.len()];
        let (a, b) = (br.from_bus, br.to_bus);
        // +1 MW at a, -1 MW at b
        let flows: Vec<f64> = s.branches.iter().map(|l| l.sensitivity()[a] - l.sensitivity()[b]).collect();
        for bus in 0..nb {
            let mut net_out = 0.0;
            for (l, f) in s.branches.iter().zip(&flows) {
                if l.from_bus == bus { net_out += f; }
                if l.to_bus == bus { net_out -= f; }
            }
            let inj = if bus == a { 1.0 } else if bus == b { -1.0 } else { 0.0 };
            prop_assert!((net_out - inj).abs() < 1e-9);
        }
        // direct angle solve with the last bus as reference instead of bus 0
        let m = nb - 1;
        let mut lap = nalgebra::DMatrix::<f64>::zeros(m, m);
        for l in &s.branches {
            let y = 1.0 / l.reactance;
            for (u, v) in [(l.from_bus, l.to_bus), (l.to_bus, l.from_bus)] {
                if u < m {
                    lap[(u, u)] += y;
                    if v < m { lap[(u, v)] -= y; }
                }
            }
        }
        let mut p = nalgebra::DVector::<f64>::zeros(m);
        if a < m { p[a] += 1.0; }
        if b < m { p[b] -= 1.0; }
        let reduced = lap.lu().solve(&p).unwrap();
        let theta: Vec<f64> = (0..nb).map(|k| if k < m { reduced[k] } else { 0.0 }).collect();
        for (l, f) in s.branches.iter().zip(&flows) {
            let direct = (theta[l.from_bus] - theta[l.to_bus]) / l.reactance;
            prop_assert!((direct - f).abs() < 1e-8);
        }
        prop_assert!(s.branches.iter().all(|l| l.sensitivity()[0] == 0.0));
    }

    #[test]
    fn system_json_round_trips(sys in arb_network(), cost in 0.0f64..1e4, w in 0.1f64..300.0) {
        let mut sys = sys;
        sys.thermal_units[0].p_max = w;
        sys.thermal_units[0].p_min = w / 3.0;
        sys.thermal_units[0].segments = vec![
            Segment { width_mw: w / 7.0, cost_per_mwh: cost },
            Segment { width_mw: w - w / 7.0, cost_per_mwh: cost * 1.5 },
        ];
        let once = PowerSystem::from_json_str(&sys.to_json_string().unwrap()).unwrap();
        let twice = PowerSystem::from_json_str(&once.to_json_string().unwrap()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn reserve_is_linear(l1 in 0.0f64..1e3, l2 in 0.0f64..1e3, a in 0.0f64..0.5, k in 0.0f64..2.0) {
        let r1 = rule_of_thumb_reserve(&[vec![l1]], a).unwrap()[0];
        let r2 = rule_of_thumb_reserve(&[vec![l2]], a).unwrap()[0];
        let r12 = rule_of_thumb_reserve(&[vec![l1 + l2]], a).unwrap()[0];
        prop_assert!((r12.sr - r1.sr - r2.sr).abs() < 1e-9);
        let ka = rule_of_thumb_reserve(&[vec![l1]], a * k / 2.0).unwrap()[0];
        prop_assert!((ka.total() - r1.total() * k / 2.0).abs() < 1e-9);
    }
}
