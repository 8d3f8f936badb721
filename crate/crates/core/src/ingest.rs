//! Raw multi-agent samples, dataset validation and collision labelling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance on the sampling period.
pub const DT_TOLERANCE: f64 = 0.1;
/// Fraction of steps in a track that must respect the sampling period.
pub const DT_REQUIRED_FRACTION: f64 = 0.99;
/// Speed below which the heading of the previous sample is kept.
pub const HEADING_MIN_SPEED: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentType {
    Car,
    Truck,
    Pedestrian,
    Other,
}

impl AgentType {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentType::Car => "car",
            AgentType::Truck => "truck",
            AgentType::Pedestrian => "pedestrian",
            AgentType::Other => "other",
        }
    }

    pub fn is_vehicle(self) -> bool {
        !matches!(self, AgentType::Pedestrian)
    }
}

impl fmt::Display for AgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "car" => Ok(AgentType::Car),
            "truck" | "bus" => Ok(AgentType::Truck),
            "pedestrian" | "ped" => Ok(AgentType::Pedestrian),
            "other" => Ok(AgentType::Other),
            _ => Err(()),
        }
    }
}

/// One agent at one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub recording_id: String,
    pub trajectory_id: String,
    pub frame: u64,
    pub time: f64,
    pub agent_id: String,
    pub agent_type: AgentType,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub length: f64,
    pub width: f64,
    pub lane_id: Option<i64>,
    pub sv_flag: bool,
}

impl RawSample {
    pub fn speed(&self) -> f64 {
        libm::hypot(self.vx, self.vy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub trajectory_id: String,
    pub frame: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionRule {
    /// Keep only the events already present.
    LabelsOnly,
    /// Replace the events by geometric box overlaps.
    GeometricOverlap,
    /// Union of both.
    Either,
}

impl FromStr for CollisionRule {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "labels_only" | "labels-only" => Ok(CollisionRule::LabelsOnly),
            "geometric_overlap" | "geometric-overlap" => Ok(CollisionRule::GeometricOverlap),
            "either" => Ok(CollisionRule::Either),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("non-monotone time in trajectory {trajectory_id}, agent {agent_id}")]
    NonMonotoneTime { trajectory_id: String, agent_id: String },
    #[error("sample {index}: {reason}")]
    InvalidSample { index: usize, reason: &'static str },
    #[error("trajectory {0} must contain exactly one subject vehicle")]
    SubjectVehicle(String),
    #[error("irregular sampling in trajectory {trajectory_id}, agent {agent_id}")]
    IrregularSampling { trajectory_id: String, agent_id: String },
    #[error("no consecutive frames to infer the sampling period from")]
    NoTimeSteps,
    #[error("collision event ({trajectory_id}, {frame}) does not match any frame")]
    UnknownEvent { trajectory_id: String, frame: u64 },
}

/// Validated recording set. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<RawSample>,
    dt: f64,
    collision_events: Vec<CollisionEvent>,
}

/// Samples of one trajectory grouped by subject-vehicle frame.
#[derive(Debug, Clone)]
pub struct Scene {
    pub trajectory_id: String,
    pub frames: Vec<SceneFrame>,
}

#[derive(Debug, Clone)]
pub struct SceneFrame {
    pub frame: u64,
    pub time: f64,
    /// Index of the subject-vehicle sample.
    pub sv: usize,
    /// Indices of every other agent's sample at this frame.
    pub others: Vec<usize>,
}

impl Dataset {
    /// Validates samples and events; the sampling period is the median
    /// per-frame time step.
    pub fn new(samples: Vec<RawSample>, collision_events: Vec<CollisionEvent>) -> Result<Self, IngestError> {
        for (index, s) in samples.iter().enumerate() {
            let kin = [s.time, s.x, s.y, s.vx, s.vy];
            if kin.iter().any(|v| !v.is_finite()) {
                return Err(IngestError::InvalidSample { index, reason: "non-finite value" });
            }
            if !(s.length.is_finite() && s.width.is_finite() && s.length >= 0.0 && s.width >= 0.0) {
                return Err(IngestError::InvalidSample { index, reason: "length and width must be finite and non-negative" });
            }
        }
        let tracks = track_index(&samples);
        let mut steps = Vec::new();
        for ((tid, aid), idx) in &tracks {
            for w in idx.windows(2) {
                let (a, b) = (&samples[w[0]], &samples[w[1]]);
                if b.frame <= a.frame || b.time <= a.time {
                    return Err(IngestError::NonMonotoneTime { trajectory_id: (*tid).into(), agent_id: (*aid).into() });
                }
                steps.push((b.time - a.time) / (b.frame - a.frame) as f64);
            }
        }
        let mut sv_count: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for s in &samples {
            let entry = sv_count.entry(s.trajectory_id.as_str()).or_default();
            if s.sv_flag {
                entry.insert(s.agent_id.as_str());
            }
        }
        if let Some((tid, _)) = sv_count.iter().find(|(_, svs)| svs.len() != 1) {
            return Err(IngestError::SubjectVehicle((*tid).into()));
        }
        if steps.is_empty() {
            return Err(IngestError::NoTimeSteps);
        }
        steps.sort_by(f64::total_cmp);
        let mid = steps.len() / 2;
        let dt = if steps.len() % 2 == 1 { steps[mid] } else { 0.5 * (steps[mid - 1] + steps[mid]) };
        for ((tid, aid), idx) in &tracks {
            let mut total = 0usize;
            let mut ok = 0usize;
            for w in idx.windows(2) {
                let (a, b) = (&samples[w[0]], &samples[w[1]]);
                if b.frame - a.frame != 1 {
                    continue;
                }
                total += 1;
                if libm::fabs(b.time - a.time - dt) <= DT_TOLERANCE * dt {
                    ok += 1;
                }
            }
            if total > 0 && (ok as f64) < DT_REQUIRED_FRACTION * total as f64 {
                return Err(IngestError::IrregularSampling { trajectory_id: (*tid).into(), agent_id: (*aid).into() });
            }
        }
        let frames: BTreeSet<(&str, u64)> = samples.iter().map(|s| (s.trajectory_id.as_str(), s.frame)).collect();
        for e in &collision_events {
            if !frames.contains(&(e.trajectory_id.as_str(), e.frame)) {
                return Err(IngestError::UnknownEvent { trajectory_id: e.trajectory_id.clone(), frame: e.frame });
            }
        }
        let collision_events: Vec<CollisionEvent> =
            collision_events.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        Ok(Self { samples, dt, collision_events })
    }

    pub fn samples(&self) -> &[RawSample] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Events sorted by trajectory and frame, without duplicates.
    pub fn collision_events(&self) -> &[CollisionEvent] {
        &self.collision_events
    }

    pub fn has_collisions(&self) -> bool {
        !self.collision_events.is_empty()
    }

    pub fn is_collision(&self, trajectory_id: &str, frame: u64) -> bool {
        self.collision_events
            .binary_search_by(|e| (e.trajectory_id.as_str(), e.frame).cmp(&(trajectory_id, frame)))
            .is_ok()
    }

    /// Distinct trajectory ids in sorted order.
    pub fn trajectory_ids(&self) -> Vec<&str> {
        self.samples.iter().map(|s| s.trajectory_id.as_str()).collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Replaces the event list (events are validated).
    pub fn with_events(&self, events: Vec<CollisionEvent>) -> Result<Self, IngestError> {
        Self::new(self.samples.clone(), events)
    }

    /// Heading (radians) of every sample, from its velocity direction. Slow
    /// samples keep the previous heading of their track; a track starting
    /// slow points along `+x`.
    pub fn headings(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.samples.len()];
        for idx in track_index(&self.samples).values() {
            let mut last = 0.0;
            for &i in idx {
                let s = &self.samples[i];
                if s.speed() >= HEADING_MIN_SPEED {
                    last = libm::atan2(s.vy, s.vx);
                }
                out[i] = last;
            }
        }
        out
    }

    /// Per-trajectory frames of the subject vehicle with the co-present
    /// agents, ordered by trajectory id and frame.
    pub fn scenes(&self) -> Vec<Scene> {
        let mut by_traj: BTreeMap<&str, BTreeMap<u64, (Option<usize>, Vec<usize>)>> = BTreeMap::new();
        for (i, s) in self.samples.iter().enumerate() {
            let slot = by_traj.entry(s.trajectory_id.as_str()).or_default().entry(s.frame).or_default();
            if s.sv_flag {
                slot.0 = Some(i);
            } else {
                slot.1.push(i);
            }
        }
        by_traj
            .into_iter()
            .map(|(tid, frames)| Scene {
                trajectory_id: tid.into(),
                frames: frames
                    .into_iter()
                    .filter_map(|(frame, (sv, others))| {
                        sv.map(|sv| SceneFrame { frame, time: self.samples[sv].time, sv, others })
                    })
                    .collect(),
            })
            .collect()
    }
}

/// Sample indices per (trajectory, agent), in input order.
fn track_index(samples: &[RawSample]) -> BTreeMap<(&str, &str), Vec<usize>> {
    let mut tracks: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        tracks.entry((s.trajectory_id.as_str(), s.agent_id.as_str())).or_default().push(i);
    }
    tracks
}

/// Box of an agent in the subject vehicle's frame: `[lon_lo, lon_hi] x
/// [lat_lo, lat_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LocalBox {
    lon: (f64, f64),
    lat: (f64, f64),
}

impl LocalBox {
    fn is_degenerate(&self) -> bool {
        self.lon.0 == self.lon.1 || self.lat.0 == self.lat.1
    }

    fn strictly_inside(&self, lon: f64, lat: f64) -> bool {
        lon > self.lon.0 && lon < self.lon.1 && lat > self.lat.0 && lat < self.lat.1
    }
}

/// Axis-aligned box of `other`, oriented by `other_heading`, expressed in
/// the frame centred on `(cx, cy)` with heading `h`.
fn local_box(cx: f64, cy: f64, h: f64, other: &RawSample, other_heading: f64) -> LocalBox {
    let (sh, ch) = libm::sincos(h);
    let dx = other.x - cx;
    let dy = other.y - cy;
    let lon = dx * ch + dy * sh;
    let lat = -dx * sh + dy * ch;
    let rel = other_heading - h;
    let (sr, cr) = libm::sincos(rel);
    let hl = 0.5 * other.length;
    let hw = 0.5 * other.width;
    let ext_lon = libm::fabs(cr) * hl + libm::fabs(sr) * hw;
    let ext_lat = libm::fabs(sr) * hl + libm::fabs(cr) * hw;
    LocalBox { lon: (lon - ext_lon, lon + ext_lon), lat: (lat - ext_lat, lat + ext_lat) }
}

fn open_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0.max(b.0) < a.1.min(b.1)
}

fn boxes_collide(sv: &LocalBox, other: &LocalBox) -> bool {
    match (sv.is_degenerate(), other.is_degenerate()) {
        (false, false) => open_overlap(sv.lon, other.lon) && open_overlap(sv.lat, other.lat),
        (false, true) => sv.strictly_inside(0.5 * (other.lon.0 + other.lon.1), 0.5 * (other.lat.0 + other.lat.1)),
        (true, false) => other.strictly_inside(0.5 * (sv.lon.0 + sv.lon.1), 0.5 * (sv.lat.0 + sv.lat.1)),
        (true, true) => false,
    }
}

/// First frame per (trajectory, other agent) at which the subject
/// vehicle's box overlaps the other agent's box.
pub fn detect_overlaps(d: &Dataset) -> Vec<CollisionEvent> {
    let headings = d.headings();
    let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut events = BTreeSet::new();
    for scene in d.scenes() {
        for f in &scene.frames {
            let sv = &d.samples[f.sv];
            let svb = local_box(sv.x, sv.y, headings[f.sv], sv, headings[f.sv]);
            for &o in &f.others {
                let other = &d.samples[o];
                let key = (sv.trajectory_id.as_str(), other.agent_id.as_str());
                if seen.contains(&key) {
                    continue;
                }
                let ob = local_box(sv.x, sv.y, headings[f.sv], other, headings[o]);
                if boxes_collide(&svb, &ob) {
                    seen.insert(key);
                    events.insert(CollisionEvent { trajectory_id: scene.trajectory_id.clone(), frame: f.frame });
                }
            }
        }
    }
    events.into_iter().collect()
}

/// Applies a collision rule and returns the relabelled dataset.
pub fn label_collisions(d: &Dataset, rule: CollisionRule) -> Dataset {
    let events = match rule {
        CollisionRule::LabelsOnly => return d.clone(),
        CollisionRule::GeometricOverlap => detect_overlaps(d),
        CollisionRule::Either => {
            let mut e = detect_overlaps(d);
            e.extend(d.collision_events.iter().cloned());
            e
        }
    };
    let events: Vec<CollisionEvent> = events.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    Dataset { samples: d.samples.clone(), dt: d.dt, collision_events: events }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    pub(crate) fn sample(traj: &str, agent: &str, frame: u64, x: f64, vx: f64, sv: bool) -> RawSample {
        RawSample {
            recording_id: "r".to_string(),
            trajectory_id: traj.to_string(),
            frame,
            time: frame as f64 * 0.04,
            agent_id: agent.to_string(),
            agent_type: AgentType::Car,
            x,
            y: 0.0,
            vx,
            vy: 0.0,
            length: 4.0,
            width: 2.0,
            lane_id: Some(1),
            sv_flag: sv,
        }
    }

    /// SV at rest at x = 0; lead approaches so the boxes overlap from frame 7.
    fn overlap_fixture() -> Vec<RawSample> {
        let mut s = Vec::new();
        for f in 0..10u64 {
            s.push(sample("t", "sv", f, 0.0, 0.0, true));
            s.push(sample("t", "lead", f, 10.0 - f as f64, -1.0, false));
        }
        s
    }

    #[test]
    fn two_rows_give_dt() {
        let d = Dataset::new(vec![sample("t", "a", 0, 0.0, 1.0, true), sample("t", "a", 1, 0.04, 1.0, true)], vec![]).unwrap();
        assert!((d.dt() - 0.04).abs() < 1e-15);
        assert_eq!(d.samples().len(), 2);
    }

    #[test]
    fn backwards_time_rejected() {
        let mut b = sample("t", "a", 1, 0.0, 1.0, true);
        b.time = -1.0;
        let err = Dataset::new(vec![sample("t", "a", 0, 0.0, 1.0, true), b], vec![]).unwrap_err();
        assert!(matches!(err, IngestError::NonMonotoneTime { .. }));
    }

    #[test]
    fn subject_vehicle_must_be_unique() {
        let err = Dataset::new(
            vec![sample("t", "a", 0, 0.0, 1.0, true), sample("t", "a", 1, 0.0, 1.0, true), sample("t", "b", 0, 9.0, 1.0, true)],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err, IngestError::SubjectVehicle("t".to_string()));
    }

    #[test]
    fn irregular_track_rejected() {
        let mut rows = Vec::new();
        for f in 0..20u64 {
            let mut s = sample("t", "a", f, 0.0, 1.0, true);
            s.time = if f < 10 { f as f64 * 0.04 } else { 0.4 + (f - 10) as f64 * 0.08 };
            rows.push(s);
        }
        assert!(matches!(Dataset::new(rows, vec![]), Err(IngestError::IrregularSampling { .. })));
    }

    #[test]
    fn unknown_event_rejected() {
        let rows = vec![sample("t", "a", 0, 0.0, 1.0, true), sample("t", "a", 1, 0.04, 1.0, true)];
        let ev = CollisionEvent { trajectory_id: "t".into(), frame: 5 };
        assert!(matches!(Dataset::new(rows, vec![ev]), Err(IngestError::UnknownEvent { .. })));
    }

    #[test]
    fn far_apart_cars_have_no_events() {
        let mut rows = Vec::new();
        for f in 0..5u64 {
            rows.push(sample("t", "sv", f, f as f64, 25.0, true));
            rows.push(sample("t", "lead", f, 50.0 + f as f64, 25.0, false));
        }
        let d = Dataset::new(rows, vec![]).unwrap();
        assert!(label_collisions(&d, CollisionRule::LabelsOnly).collision_events().is_empty());
        assert!(label_collisions(&d, CollisionRule::Either).collision_events().is_empty());
    }

    #[test]
    fn first_overlap_frame_is_recorded() {
        let d = Dataset::new(overlap_fixture(), vec![]).unwrap();
        let g = label_collisions(&d, CollisionRule::GeometricOverlap);
        assert_eq!(g.collision_events(), &[CollisionEvent { trajectory_id: "t".into(), frame: 7 }]);
    }

    #[test]
    fn either_is_union() {
        let d = Dataset::new(overlap_fixture(), vec![CollisionEvent { trajectory_id: "t".into(), frame: 3 }]).unwrap();
        let frames: Vec<u64> = label_collisions(&d, CollisionRule::Either).collision_events().iter().map(|e| e.frame).collect();
        assert_eq!(frames, vec![3, 7]);
        let geo: Vec<u64> =
            label_collisions(&d, CollisionRule::GeometricOverlap).collision_events().iter().map(|e| e.frame).collect();
        assert_eq!(geo, vec![7]);
    }

    #[test]
    fn labelling_is_idempotent() {
        let d = Dataset::new(overlap_fixture(), vec![CollisionEvent { trajectory_id: "t".into(), frame: 3 }]).unwrap();
        for rule in [CollisionRule::LabelsOnly, CollisionRule::GeometricOverlap, CollisionRule::Either] {
            let once = label_collisions(&d, rule);
            assert_eq!(label_collisions(&once, rule), once, "{}", format!("{rule:?}"));
        }
    }

    #[test]
    fn pedestrian_inside_box_collides() {
        let mut rows = Vec::new();
        for f in 0..3u64 {
            rows.push(sample("t", "sv", f, 0.0, 1.0, true));
            let mut p = sample("t", "ped", f, 3.0 - f as f64, 0.0, false);
            p.agent_type = AgentType::Pedestrian;
            p.length = 0.0;
            p.width = 0.0;
            rows.push(p);
        }
        // Ped at x = 3, 2, 1; the SV box spans [-2, 2], so only x = 1 is strictly inside.
        let d = label_collisions(&Dataset::new(rows, vec![]).unwrap(), CollisionRule::GeometricOverlap);
        assert_eq!(d.collision_events().iter().map(|e| e.frame).collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn slow_samples_keep_heading() {
        let mut rows = vec![sample("t", "a", 0, 0.0, 0.0, true)];
        let mut b = sample("t", "a", 1, 0.0, 0.0, true);
        b.vx = 0.0;
        b.vy = 1.0;
        rows.push(b);
        let mut c = sample("t", "a", 2, 0.0, 0.0, true);
        c.vx = 0.001;
        rows.push(c);
        let h = Dataset::new(rows, vec![]).unwrap().headings();
        assert_eq!(h[0], 0.0);
        assert!((h[1] - core::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(h[2], h[1]);
    }
}
