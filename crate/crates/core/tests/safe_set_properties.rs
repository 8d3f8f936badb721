use std::collections::BTreeSet;

use proptest::prelude::*;
use safeset_core::oss::{transitions, OssState, StateTrajectory};
use safeset_core::safe_set::{excluded_states, extract_safe_states, partition_transitions};
use safeset_core::ReachMode;

/// Trajectories over a coarse integer grid so states repeat across them.
fn trajectories() -> impl Strategy<Value = Vec<StateTrajectory>> {
    let traj = (prop::collection::vec((0i32..6, 0i32..3), 1..8), prop::option::of(0usize..8), 0u64..3);
    prop::collection::vec(traj, 1..7).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(k, (cells, crash, skip))| {
                let tid = format!("t{k}");
                let n = cells.len();
                let states = cells
                    .into_iter()
                    .enumerate()
                    .map(|(i, (a, b))| OssState {
                        values: vec![a as f64, b as f64],
                        time: i as f64,
                        // A missing frame in the middle of some trajectories.
                        frame: i as u64 + u64::from(skip == 1 && i >= n / 2),
                        trajectory_id: tid.clone(),
                        is_unsafe: crash == Some(i),
                    })
                    .collect();
                StateTrajectory::from_states(tid, states)
            })
            .collect()
    })
}

fn key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|v| v.to_bits()).collect()
}

fn set(pts: &[Vec<f64>]) -> BTreeSet<Vec<u64>> {
    pts.iter().map(|p| key(p)).collect()
}

fn mode() -> impl Strategy<Value = ReachMode> {
    prop_oneof![Just(ReachMode::Undirected), Just(ReachMode::Ancestors), Just(ReachMode::Descendants)]
}

proptest! {
    #[test]
    fn safe_states_avoid_unsafe_trajectories(ts in trajectories(), m in mode()) {
        let (ds, _) = extract_safe_states(&ts, m, 0.0);
        for t in ts.iter().filter(|t| t.is_unsafe()) {
            for s in &t.states {
                prop_assert!(!ds.contains(&s.values));
            }
        }
        let safe_vertices: BTreeSet<Vec<u64>> =
            ts.iter().filter(|t| !t.is_unsafe()).flat_map(|t| t.states.iter().map(|s| key(&s.values))).collect();
        prop_assert!(set(ds.points()).is_subset(&safe_vertices));
    }

    #[test]
    fn larger_radius_never_grows_the_safe_set(ts in trajectories(), m in mode(), r in 0.0..2.0f64, extra in 0.0..2.0f64) {
        let (small, _) = extract_safe_states(&ts, m, r + extra);
        let (large, _) = extract_safe_states(&ts, m, r);
        prop_assert!(set(small.points()).is_subset(&set(large.points())));
    }

    #[test]
    fn undirected_prunes_the_most(ts in trajectories()) {
        let (u, _) = extract_safe_states(&ts, ReachMode::Undirected, 0.0);
        for m in [ReachMode::Ancestors, ReachMode::Descendants] {
            let (d, _) = extract_safe_states(&ts, m, 0.0);
            prop_assert!(set(u.points()).is_subset(&set(d.points())));
        }
    }

    #[test]
    fn extraction_is_idempotent(ts in trajectories(), m in mode()) {
        let (ds, _) = extract_safe_states(&ts, m, 0.0);
        let again: Vec<StateTrajectory> = ds
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let tid = format!("d{i}");
                let s = OssState { values: p.clone(), time: 0.0, frame: 0, trajectory_id: tid.clone(), is_unsafe: false };
                StateTrajectory::from_states(tid, vec![s])
            })
            .collect();
        let (ds2, _) = extract_safe_states(&again, m, 0.0);
        prop_assert_eq!(set(ds.points()), set(ds2.points()));
    }

    #[test]
    fn partition_is_exhaustive(ts in trajectories(), m in mode()) {
        let (ds, _) = extract_safe_states(&ts, m, 0.0);
        let td = transitions(&ts);
        let expected: usize = ts.iter().map(|t| t.gap_free.iter().filter(|g| **g).count()).sum();
        prop_assert_eq!(td.len(), expected);
        let (safe, rest) = partition_transitions(&td, &ds);
        prop_assert_eq!(safe.len() + rest.len(), td.len());
        prop_assert!(safe.pairs.iter().all(|(a, b)| ds.contains(&a.values) && ds.contains(&b.values)));
        prop_assert!(rest.pairs.iter().all(|(a, b)| !ds.contains(&a.values) || !ds.contains(&b.values)));
        let ex = excluded_states(&ts, &ds);
        prop_assert!(ex.points().iter().all(|p| !ds.contains(p)));
    }
}
