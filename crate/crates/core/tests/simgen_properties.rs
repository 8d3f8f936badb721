use proptest::prelude::*;
use safeset_core::simgen::{idm_accel, simulate_follow, ScenarioKind, ScenarioSpec, DEFAULT_DT, IDM_0, IDM_1, VEHICLE_LENGTH};

fn idm() -> impl Strategy<Value = safeset_core::simgen::IdmParams> {
    prop_oneof![Just(IDM_0), Just(IDM_1)]
}

proptest! {
    #[test]
    fn acceleration_is_monotone_and_clamped(p in idm(), v in 0.0..35.0f64, gap in 0.1..150.0f64, more in 0.0..50.0f64, dv in -15.0..15.0f64, ddv in 0.0..10.0f64) {
        let a = idm_accel(&p, v, gap, dv).unwrap();
        prop_assert!(a >= -p.b_max && a <= p.a_max);
        prop_assert!(idm_accel(&p, v, gap + more, dv).unwrap() >= a - 1e-12);
        prop_assert!(idm_accel(&p, v, gap, dv + ddv).unwrap() <= a + 1e-12);
    }

    #[test]
    fn rollouts_are_physical(
        p in idm(),
        kind in prop_oneof![Just(ScenarioKind::StationaryLead), Just(ScenarioKind::SlowerLead), Just(ScenarioKind::BrakingLead)],
        v in 0.0..25.0f64,
        lead in 0.0..25.0f64,
        gap in 1.0..60.0f64,
        decel in 0.0..8.0f64,
    ) {
        let sc = ScenarioSpec { kind, sv_speed0: v, lead_speed0: lead, initial_gap: gap, lead_decel: decel, duration: 6.0, dt: DEFAULT_DT };
        let d = simulate_follow(&p, &sc).unwrap();
        let s = d.samples();
        let sv: Vec<_> = s.iter().filter(|x| x.sv_flag).collect();
        let ld: Vec<_> = s.iter().filter(|x| !x.sv_flag).collect();
        prop_assert_eq!(sv.len(), ld.len());
        for w in sv.windows(2).chain(ld.windows(2)) {
            prop_assert!(w[1].x >= w[0].x);
            prop_assert!(w[1].vx >= 0.0);
        }
        let gaps: Vec<f64> = sv.iter().zip(&ld).map(|(a, b)| b.x - a.x - VEHICLE_LENGTH).collect();
        let n = gaps.len();
        prop_assert!(gaps[..n - 1].iter().all(|g| *g > 0.0));
        prop_assert_eq!(d.has_collisions(), gaps[n - 1] <= 0.0);
    }
}
