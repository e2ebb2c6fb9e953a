use evim_core::optimizer::{hooke_jeeves, HJConfig};
use evim_core::performance::MotorModel;
use evim_core::spec::{default_bounds, DesignVector, MotorSpec, SlotShape, NUM_VARIABLES};
use evim_core::study::{run_study, select_best, DesignTable, SelectionPolicy, StudyConfig};
use proptest::prelude::*;

fn scenario() -> impl Strategy<Value = MotorSpec> {
    (
        prop_oneof![Just(2u32), Just(4u32)],
        any::<bool>(),
        1400.0f64..2800.0,
    )
        .prop_map(|(p, round, v)| {
            let shape = if round {
                SlotShape::Round
            } else {
                SlotShape::Rectangular
            };
            MotorSpec::ev_traction(p, v).with_rotor_slot_shape(shape)
        })
}

fn design_in(spec: &MotorSpec) -> impl Strategy<Value = DesignVector> {
    let b = default_bounds(spec);
    let (lo, hi) = (b.lower_array(), b.upper_array());
    proptest::collection::vec(0.0f64..=1.0, NUM_VARIABLES).prop_map(move |t| {
        let x: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(i, u)| lo[i] + u * (hi[i] - lo[i]))
            .collect();
        DesignVector::from_slice(&x)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluated_reports_satisfy_identities(
        (spec, x) in scenario().prop_flat_map(|s| (Just(s.clone()), design_in(&s)))
    ) {
        let model = MotorModel::new(spec.clone());
        if let Ok(r) = model.evaluate(&x) {
            let ratio = (spec.rated_speed / spec.max_speed).powi(2);
            prop_assert!((r.breakdown_torque_max - ratio * r.breakdown_torque_base).abs()
                <= 1e-12 * r.breakdown_torque_base);
            prop_assert!(r.efficiency > 0.0 && r.efficiency < 1.0);
            prop_assert!(r.power_factor > 0.0 && r.power_factor <= 1.0);
            prop_assert!(r.temperature_rise > 0.0 && r.mass > 0.0 && r.cost > 0.0);
            // evaluation is pure
            prop_assert_eq!(model.evaluate(&x).unwrap(), r);
        }
    }

    #[test]
    fn round_rotor_reports_tie_depth_to_width(x in design_in(&MotorSpec::ev_traction(2, 1800.0))) {
        let spec = MotorSpec::ev_traction(2, 1800.0).with_rotor_slot_shape(SlotShape::Round);
        if let Ok(r) = MotorModel::new(spec).evaluate(&x) {
            prop_assert_eq!(r.design.rotor_slot_depth, r.design.rotor_slot_width);
        }
    }

    #[test]
    fn search_never_leaves_bounds(
        c in proptest::collection::vec(-2.0f64..2.0, 3),
        x0 in proptest::collection::vec(0.0f64..1.0, 3),
    ) {
        let bounds = vec![(-1.0, 1.0); 3];
        let start: Vec<f64> = x0.iter().map(|u| -1.0 + 2.0 * u).collect();
        let r = hooke_jeeves(
            |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum(),
            &start,
            &bounds,
            &HJConfig::default(),
        ).unwrap();
        for e in &r.trace {
            prop_assert!(e.x.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
        for (xi, ci) in r.x.iter().zip(&c) {
            prop_assert!((xi - ci.clamp(-1.0, 1.0)).abs() < 1e-3);
        }
    }

    #[test]
    fn table_csv_round_trips(cells in proptest::collection::vec("[-0-9.a-z ,\"]{0,8}", 6)) {
        let t = DesignTable {
            columns: vec!["a 1600".into(), "b, 1800".into()],
            rows: vec![
                ("L (m)".into(), cells[0..2].to_vec()),
                ("D (m)".into(), cells[2..4].to_vec()),
                ("eta (%)".into(), cells[4..6].to_vec()),
            ],
        };
        prop_assert_eq!(DesignTable::from_csv(&t.to_csv().unwrap()).unwrap(), t);
    }
}

#[test]
fn selection_ignores_scenario_order() {
    let cfg = StudyConfig {
        pole_counts: vec![2, 4],
        rated_speeds: vec![1800.0],
        optimizer: HJConfig {
            start_fractions: vec![0.5],
            ..HJConfig::default()
        },
        ..StudyConfig::default()
    };
    let mut report = run_study(&cfg).unwrap();
    let first = select_best(&report, SelectionPolicy::EfficiencyFirst).unwrap();
    report.scenarios.reverse();
    assert_eq!(
        select_best(&report, SelectionPolicy::EfficiencyFirst).unwrap(),
        first
    );
    report.scenarios.rotate_left(1);
    assert_eq!(
        select_best(&report, SelectionPolicy::EfficiencyFirst).unwrap(),
        first
    );
}
