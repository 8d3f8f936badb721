//! Safe-transition graph and extraction of potentially safe states.
//!
//! Vertices are distinct state vectors (exact binary equality) seen on
//! collision-free trajectories; edges are their gap-free transitions. Every
//! state of a trajectory that meets the collision set seeds a reachability
//! query, and everything reachable is removed. Queries run against the
//! graph as built and the removals are applied together afterwards, which
//! gives the same result as removing one query at a time because a vertex
//! reachable in the pruned graph is also reachable in the original one, and
//! a vertex cut off by an earlier removal was reachable through it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::oss::{OssState, StateTrajectory, TransitionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReachMode {
    /// Vertices with a directed path to the seed.
    Ancestors,
    /// Vertices reachable from the seed along directed edges.
    Descendants,
    /// The seed's connected component, ignoring direction.
    #[default]
    Undirected,
}

impl FromStr for ReachMode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "ancestors" => Ok(ReachMode::Ancestors),
            "descendants" => Ok(ReachMode::Descendants),
            "undirected" => Ok(ReachMode::Undirected),
            _ => Err(()),
        }
    }
}

type Key = Vec<u64>;

fn key(values: &[f64]) -> Key {
    values.iter().map(|&v| if v == 0.0 { 0 } else { v.to_bits() }).collect()
}

/// Set of distinct state vectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StateSet {
    keys: BTreeSet<Key>,
    points: Vec<Vec<f64>>,
}

impl StateSet {
    pub fn from_values<I: IntoIterator<Item = Vec<f64>>>(values: I) -> Self {
        let mut s = Self::default();
        for v in values {
            if s.keys.insert(key(&v)) {
                s.points.push(v);
            }
        }
        s
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        self.keys.contains(&key(values))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Members in first-seen order.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

#[derive(Debug, Clone, Default)]
pub struct SafeGraph {
    values: Vec<Vec<f64>>,
    index: BTreeMap<Key, u32>,
    out: Vec<Vec<u32>>,
    inn: Vec<Vec<u32>>,
    alive: Vec<bool>,
    /// Vertex ids sorted by first coordinate, for radius queries.
    by_first: Vec<u32>,
}

impl SafeGraph {
    fn vertex_id(&mut self, values: &[f64]) -> u32 {
        let k = key(values);
        if let Some(&id) = self.index.get(&k) {
            return id;
        }
        let id = self.values.len() as u32;
        self.index.insert(k, id);
        self.values.push(values.to_vec());
        self.out.push(Vec::new());
        self.inn.push(Vec::new());
        self.alive.push(true);
        id
    }

    fn finish(&mut self) {
        for adj in self.out.iter_mut().chain(self.inn.iter_mut()) {
            adj.sort_unstable();
            adj.dedup();
        }
        let mut order: Vec<u32> = (0..self.values.len() as u32).collect();
        order.sort_by(|&a, &b| self.values[a as usize][0].total_cmp(&self.values[b as usize][0]).then(a.cmp(&b)));
        self.by_first = order;
    }

    /// Number of surviving vertices.
    pub fn num_vertices(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    /// Number of edges between surviving vertices.
    pub fn num_edges(&self) -> usize {
        (0..self.values.len())
            .filter(|&v| self.alive[v])
            .map(|v| self.out[v].iter().filter(|&&w| self.alive[w as usize]).count())
            .sum()
    }

    pub fn vertex(&self, id: u32) -> &[f64] {
        &self.values[id as usize]
    }

    pub fn id_of(&self, values: &[f64]) -> Option<u32> {
        self.index.get(&key(values)).copied().filter(|&id| self.alive[id as usize])
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        self.id_of(values).is_some()
    }

    pub fn has_edge(&self, from: &[f64], to: &[f64]) -> bool {
        match (self.id_of(from), self.id_of(to)) {
            (Some(a), Some(b)) => self.out[a as usize].binary_search(&b).is_ok(),
            _ => false,
        }
    }

    /// Surviving vertex values in insertion order.
    pub fn states(&self) -> Vec<Vec<f64>> {
        (0..self.values.len()).filter(|&v| self.alive[v]).map(|v| self.values[v].clone()).collect()
    }

    fn seeds(&self, s: &[f64], radius: f64) -> Vec<u32> {
        if radius <= 0.0 {
            return self.id_of(s).into_iter().collect();
        }
        let Some(&first) = s.first() else {
            return Vec::new();
        };
        let start = self.by_first.partition_point(|&v| self.values[v as usize][0] < first - radius);
        self.by_first[start..]
            .iter()
            .take_while(|&&v| self.values[v as usize][0] <= first + radius)
            .copied()
            .filter(|&v| {
                self.alive[v as usize]
                    && self.values[v as usize].len() == s.len()
                    && self.values[v as usize].iter().zip(s).all(|(a, b)| libm::fabs(a - b) <= radius)
            })
            .collect()
    }

    /// Ids of all vertices linked to `s` under `mode` (seeds included).
    pub fn reachable_ids(&self, s: &[f64], mode: ReachMode, match_radius: f64) -> BTreeSet<u32> {
        let mut seen = BTreeSet::new();
        let mut stack = self.seeds(s, match_radius);
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            let v = v as usize;
            let fwd = matches!(mode, ReachMode::Descendants | ReachMode::Undirected);
            let back = matches!(mode, ReachMode::Ancestors | ReachMode::Undirected);
            let nexts = fwd.then_some(&self.out[v]).into_iter().chain(back.then_some(&self.inn[v]));
            for adj in nexts {
                for &w in adj {
                    if self.alive[w as usize] && !seen.contains(&w) {
                        stack.push(w);
                    }
                }
            }
        }
        seen
    }

    fn remove(&mut self, ids: &BTreeSet<u32>) {
        for &v in ids {
            self.alive[v as usize] = false;
        }
    }
}

/// Splits trajectories by whether any state is unsafe.
pub fn classify_trajectories(ts: &[StateTrajectory]) -> (Vec<&StateTrajectory>, Vec<&StateTrajectory>) {
    ts.iter().partition(|t| !t.is_unsafe())
}

/// Graph of all states and gap-free transitions of `safe`.
pub fn build_safe_graph(safe: &[&StateTrajectory]) -> SafeGraph {
    let mut g = SafeGraph::default();
    for t in safe {
        let ids: Vec<u32> = t.states.iter().map(|s| g.vertex_id(&s.values)).collect();
        for (i, w) in ids.windows(2).enumerate() {
            if t.gap_free[i] {
                g.out[w[0] as usize].push(w[1]);
                g.inn[w[1] as usize].push(w[0]);
            }
        }
    }
    g.finish();
    g
}

/// States linked to `s` in `g` under `mode`.
pub fn reachable(s: &[f64], g: &SafeGraph, mode: ReachMode, match_radius: f64) -> Vec<Vec<f64>> {
    g.reachable_ids(s, mode, match_radius).into_iter().map(|v| g.vertex(v).to_vec()).collect()
}

/// Potentially safe states and the pruned safe graph.
pub fn extract_safe_states(ts: &[StateTrajectory], mode: ReachMode, match_radius: f64) -> (StateSet, SafeGraph) {
    let (safe, unsafe_) = classify_trajectories(ts);
    let mut g = build_safe_graph(&safe);
    let queries: Vec<&OssState> = unsafe_.iter().flat_map(|t| t.states.iter()).collect();
    if !queries.is_empty() {
        let frozen = &g;
        let hits = crate::par::map(&queries, |s| frozen.reachable_ids(&s.values, mode, match_radius));
        let mut removed = BTreeSet::new();
        for h in hits {
            removed.extend(h);
        }
        g.remove(&removed);
    }
    (StateSet::from_values(g.states()), g)
}

/// Transitions with both endpoints in `ds`, and the rest.
pub fn partition_transitions(td: &TransitionSet, ds: &StateSet) -> (TransitionSet, TransitionSet) {
    let (inside, rest): (Vec<_>, Vec<_>) =
        td.pairs.iter().cloned().partition(|(a, b)| ds.contains(&a.values) && ds.contains(&b.values));
    (TransitionSet { pairs: inside }, TransitionSet { pairs: rest })
}

/// Values of every state that is not in `ds`.
pub fn excluded_states(ts: &[StateTrajectory], ds: &StateSet) -> StateSet {
    StateSet::from_values(ts.iter().flat_map(|t| t.states.iter()).filter(|s| !ds.contains(&s.values)).map(|s| s.values.clone()))
}
