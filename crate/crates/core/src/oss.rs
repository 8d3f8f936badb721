//! Operational state spaces: projection of agent tracks onto fixed-length
//! state vectors around the subject vehicle.
//!
//! Four layouts are supported:
//!
//! | kind                 | n  | layout                                                  |
//! |----------------------|----|---------------------------------------------------------|
//! | lead following       | 3  | `(v0, v1, p)`                                           |
//! | multi-vehicle        | 13 | `v0`, then `(p, v)` for fl, fc, fr, rl, rc, rr          |
//! | vehicle-pedestrian   | 5  | `(v0, p_left, q_left, p_right, q_right)`                |
//! | combined             | 17 | multi-vehicle followed by the four pedestrian features  |
//!
//! Clearances are bumper to bumper. Rear clearances are negative so that
//! the rear subregions occupy `[p_min, 0]` and the front ones `[0, p_max]`.
//! States outside the spec box are dropped, except at collision frames where
//! they are clamped onto the box so the unsafe state is still observed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Normalizer;
use crate::ingest::{Dataset, RawSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OssKind {
    LeadFollowing,
    MultiVehicle,
    VehiclePedestrian,
    Combined,
}

impl OssKind {
    pub fn dim(self) -> usize {
        match self {
            OssKind::LeadFollowing => 3,
            OssKind::MultiVehicle => 13,
            OssKind::VehiclePedestrian => 5,
            OssKind::Combined => 17,
        }
    }
}

impl fmt::Display for OssKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OssKind::LeadFollowing => "lead_following",
            OssKind::MultiVehicle => "multi_vehicle",
            OssKind::VehiclePedestrian => "vehicle_pedestrian",
            OssKind::Combined => "combined",
        })
    }
}

/// Closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    fn is_proper(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.hi > self.lo
    }
}

/// Subregions around the subject vehicle, in state order.
pub const SUBREGIONS: [&str; 6] = ["fl", "fc", "fr", "rl", "rc", "rr"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OssSpec {
    pub kind: OssKind,
    /// Longitudinal clearance range, meters.
    pub p: Interval,
    /// Speed range, m/s.
    pub v: Interval,
    /// Largest lateral pedestrian offset, meters.
    pub q_max: f64,
    pub lane_width: f64,
    /// Lateral offsets (magnitude) of the left and right subregions.
    pub side_band: Interval,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OssError {
    #[error("operation expects a {expected} spec, got {got}")]
    SpecKindMismatch { expected: OssKind, got: OssKind },
    #[error("invalid spec: {0}")]
    InvalidSpec(&'static str),
    #[error("frame {frame} of trajectory {trajectory_id} disagrees between domains")]
    FrameMisalignment { trajectory_id: String, frame: u64 },
    #[error("expected {expected}-dimensional states, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown preset {0}")]
    UnknownPreset(String),
}

/// Named presets.
pub const PRESETS: [&str; 5] = ["highd-lead", "sumo-lead", "ncap-lead", "highd-multi", "waymo-carla-17d"];

impl OssSpec {
    pub fn preset(name: &str) -> Result<Self, OssError> {
        let lane = 3.75;
        let band = Interval::new(lane / 2.0, 1.5 * lane);
        let lead = |p_max: f64, v: Interval| OssSpec {
            kind: OssKind::LeadFollowing,
            p: Interval::new(0.0, p_max),
            v,
            q_max: 0.0,
            lane_width: lane,
            side_band: band,
        };
        let spec = match name {
            "highd-lead" => lead(50.0, Interval::new(20.0, 35.0)),
            "sumo-lead" => lead(100.0, Interval::new(0.0, 30.0)),
            "ncap-lead" => lead(40.0, Interval::new(0.0, 25.0)),
            "highd-multi" => OssSpec {
                kind: OssKind::MultiVehicle,
                p: Interval::new(-50.0, 50.0),
                v: Interval::new(20.0, 30.0),
                q_max: 0.0,
                lane_width: lane,
                side_band: band,
            },
            "waymo-carla-17d" => OssSpec {
                kind: OssKind::Combined,
                p: Interval::new(-50.0, 50.0),
                v: Interval::new(1.0, 25.0),
                q_max: 10.0,
                lane_width: 5.0,
                side_band: Interval::new(2.5, 10.0),
            },
            _ => return Err(OssError::UnknownPreset(name.to_string())),
        };
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), OssError> {
        if !self.p.is_proper() || !self.v.is_proper() {
            return Err(OssError::InvalidSpec("clearance and speed ranges must be finite with positive length"));
        }
        if !(self.lane_width.is_finite() && self.lane_width > 0.0) {
            return Err(OssError::InvalidSpec("lane width must be positive"));
        }
        match self.kind {
            OssKind::LeadFollowing if self.p.lo < 0.0 => Err(OssError::InvalidSpec("lead clearance must be non-negative")),
            OssKind::MultiVehicle | OssKind::Combined if !(self.p.lo < 0.0 && self.p.hi > 0.0) => {
                Err(OssError::InvalidSpec("multi-vehicle clearance range must straddle zero"))
            }
            OssKind::MultiVehicle | OssKind::Combined if !self.side_band.is_proper() || self.side_band.lo < 0.0 => {
                Err(OssError::InvalidSpec("side band must be a proper non-negative interval"))
            }
            OssKind::VehiclePedestrian | OssKind::Combined if !(self.q_max.is_finite() && self.q_max > 0.0 && self.p.hi > 0.0) => {
                Err(OssError::InvalidSpec("pedestrian offsets need q_max > 0 and p_max > 0"))
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    fn front(&self) -> Interval {
        Interval::new(self.p.lo.max(0.0), self.p.hi)
    }

    fn rear(&self) -> Interval {
        Interval::new(self.p.lo, self.p.hi.min(0.0))
    }

    fn ped_p(&self) -> Interval {
        Interval::new(0.0, self.p.hi)
    }

    fn ped_q(&self) -> Interval {
        Interval::new(0.0, self.q_max)
    }

    /// Interval of every state dimension.
    pub fn dimension_bounds(&self) -> Vec<Interval> {
        let multi = || {
            let mut b = vec![self.v];
            for r in 0..6 {
                b.push(if r < 3 { self.front() } else { self.rear() });
                b.push(self.v);
            }
            b
        };
        let ped = || vec![self.ped_p(), self.ped_q(), self.ped_p(), self.ped_q()];
        match self.kind {
            OssKind::LeadFollowing => vec![self.v, self.v, self.p],
            OssKind::MultiVehicle => multi(),
            OssKind::VehiclePedestrian => {
                let mut b = vec![self.v];
                b.extend(ped());
                b
            }
            OssKind::Combined => {
                let mut b = multi();
                b.extend(ped());
                b
            }
        }
    }

    pub fn dimension_names(&self) -> Vec<String> {
        let mut multi = vec!["v0".to_string()];
        for r in SUBREGIONS {
            multi.push(format!("p_{r}"));
            multi.push(format!("v_{r}"));
        }
        let ped = ["p_left", "q_left", "p_right", "q_right"].map(String::from);
        match self.kind {
            OssKind::LeadFollowing => ["v0", "v1", "p"].map(String::from).to_vec(),
            OssKind::MultiVehicle => multi,
            OssKind::VehiclePedestrian => {
                let mut n = vec!["v0".to_string()];
                n.extend(ped);
                n
            }
            OssKind::Combined => {
                multi.extend(ped);
                multi
            }
        }
    }

    /// Volume of the state-space box.
    pub fn volume(&self) -> f64 {
        self.dimension_bounds().iter().map(Interval::len).product()
    }

    pub fn normalizer(&self) -> Normalizer {
        let b = self.dimension_bounds();
        Normalizer { lo: b.iter().map(|i| i.lo).collect(), hi: b.iter().map(|i| i.hi).collect() }
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        values.len() == self.dim() && self.dimension_bounds().iter().zip(values).all(|(b, v)| b.contains(*v))
    }

    fn expect(&self, kind: OssKind) -> Result<(), OssError> {
        if self.kind != kind {
            return Err(OssError::SpecKindMismatch { expected: kind, got: self.kind });
        }
        self.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OssState {
    pub values: Vec<f64>,
    pub time: f64,
    pub frame: u64,
    pub trajectory_id: String,
    #[serde(rename = "unsafe")]
    pub is_unsafe: bool,
}

/// Time-ordered states of one subject-vehicle trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTrajectory {
    pub trajectory_id: String,
    pub states: Vec<OssState>,
    /// `gap_free[i]` is true iff states `i` and `i + 1` come from
    /// consecutive frames.
    pub gap_free: Vec<bool>,
}

impl StateTrajectory {
    pub fn from_states(trajectory_id: String, states: Vec<OssState>) -> Self {
        let gap_free = states.windows(2).map(|w| w[1].frame == w[0].frame + 1).collect();
        Self { trajectory_id, states, gap_free }
    }

    pub fn is_unsafe(&self) -> bool {
        self.states.iter().any(|s| s.is_unsafe)
    }

    pub fn dim(&self) -> Option<usize> {
        self.states.first().map(|s| s.values.len())
    }
}

/// Consecutive state pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransitionSet {
    pub pairs: Vec<(OssState, OssState)>,
}

impl TransitionSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// All gap-free consecutive pairs, in trajectory order.
pub fn transitions(ts: &[StateTrajectory]) -> TransitionSet {
    let mut pairs = Vec::new();
    for t in ts {
        for (i, w) in t.states.windows(2).enumerate() {
            if t.gap_free[i] {
                pairs.push((w[0].clone(), w[1].clone()));
            }
        }
    }
    TransitionSet { pairs }
}

/// Subject-vehicle frame: position, heading and half extents.
struct Ego {
    x: f64,
    y: f64,
    cos: f64,
    sin: f64,
    half_len: f64,
    half_wid: f64,
    speed: f64,
    lane: Option<i64>,
}

impl Ego {
    fn new(s: &RawSample, heading: f64) -> Self {
        let (sin, cos) = libm::sincos(heading);
        Self {
            x: s.x,
            y: s.y,
            cos,
            sin,
            half_len: 0.5 * s.length,
            half_wid: 0.5 * s.width,
            speed: s.speed(),
            lane: s.lane_id,
        }
    }

    /// `(longitudinal, lateral)` offset of `o` (lateral positive to the left).
    fn local(&self, o: &RawSample) -> (f64, f64) {
        let dx = o.x - self.x;
        let dy = o.y - self.y;
        (dx * self.cos + dy * self.sin, -dx * self.sin + dy * self.cos)
    }
}

fn extract<F>(d: &Dataset, spec: &OssSpec, mut frame_state: F) -> Vec<StateTrajectory>
where
    F: FnMut(&Ego, &[&RawSample]) -> Option<Vec<f64>>,
{
    let headings = d.headings();
    let bounds = spec.dimension_bounds();
    let samples = d.samples();
    let mut out = Vec::new();
    for scene in d.scenes() {
        let mut states = Vec::new();
        for f in &scene.frames {
            let ego = Ego::new(&samples[f.sv], headings[f.sv]);
            let others: Vec<&RawSample> = f.others.iter().map(|&i| &samples[i]).collect();
            let Some(mut values) = frame_state(&ego, &others) else {
                continue;
            };
            let is_unsafe = d.is_collision(&scene.trajectory_id, f.frame);
            let inside = bounds.iter().zip(&values).all(|(b, v)| b.contains(*v));
            if !inside {
                if !is_unsafe {
                    continue;
                }
                for (v, b) in values.iter_mut().zip(&bounds) {
                    *v = b.clamp(*v);
                }
            }
            states.push(OssState {
                values,
                time: f.time,
                frame: f.frame,
                trajectory_id: scene.trajectory_id.clone(),
                is_unsafe,
            });
        }
        if !states.is_empty() {
            out.push(StateTrajectory::from_states(scene.trajectory_id.clone(), states));
        }
    }
    out
}

/// `(v0, v1, p)` against the nearest vehicle ahead in the same lane.
pub fn extract_lead_following(d: &Dataset, spec: &OssSpec) -> Result<Vec<StateTrajectory>, OssError> {
    spec.expect(OssKind::LeadFollowing)?;
    let half_lane = 0.5 * spec.lane_width;
    Ok(extract(d, spec, |ego, others| {
        let mut best: Option<(f64, &RawSample)> = None;
        for o in others.iter().filter(|o| o.agent_type.is_vehicle()) {
            let (lon, lat) = ego.local(o);
            let same_lane = match (ego.lane, o.lane_id) {
                (Some(a), Some(b)) => a == b,
                _ => libm::fabs(lat) <= half_lane,
            };
            if same_lane && lon > 0.0 && best.is_none_or(|(l, _)| lon < l) {
                best = Some((lon, o));
            }
        }
        let (lon, lead) = best?;
        Some(vec![ego.speed, lead.speed(), lon - ego.half_len - 0.5 * lead.length])
    }))
}

/// Which subregion a neighbour falls in, if any.
fn subregion(ego: &Ego, o: &RawSample, lon: f64, lat: f64, spec: &OssSpec) -> Option<usize> {
    let lateral = match (ego.lane, o.lane_id) {
        (Some(a), Some(b)) if a == b => Some(1),
        (Some(a), Some(b)) if (a - b).abs() == 1 => Some(if lat >= 0.0 { 0 } else { 2 }),
        (Some(_), Some(_)) => None,
        _ => {
            if libm::fabs(lat) <= 0.5 * spec.lane_width {
                Some(1)
            } else if spec.side_band.contains(lat) {
                Some(0)
            } else if spec.side_band.contains(-lat) {
                Some(2)
            } else {
                None
            }
        }
    }?;
    Some(if lon >= 0.0 { lateral } else { 3 + lateral })
}

/// Six-subregion neighbourhood state.
pub fn extract_multi_vehicle(d: &Dataset, spec: &OssSpec) -> Result<Vec<StateTrajectory>, OssError> {
    if spec.kind != OssKind::Combined {
        spec.expect(OssKind::MultiVehicle)?;
    } else {
        spec.validate()?;
    }
    Ok(extract(d, &OssSpec { kind: OssKind::MultiVehicle, ..spec.clone() }, |ego, others| {
        multi_vehicle_values(ego, others, spec)
    }))
}

fn multi_vehicle_values(ego: &Ego, others: &[&RawSample], spec: &OssSpec) -> Option<Vec<f64>> {
    let mut nearest: [Option<(f64, f64, f64)>; 6] = [None; 6];
    for o in others.iter().filter(|o| o.agent_type.is_vehicle()) {
        let (lon, lat) = ego.local(o);
        let Some(r) = subregion(ego, o, lon, lat, spec) else {
            continue;
        };
        let dist = libm::hypot(lon, lat);
        if nearest[r].is_some_and(|(d, _, _)| d <= dist) {
            continue;
        }
        let half = ego.half_len + 0.5 * o.length;
        let p = if libm::fabs(lon) < half {
            0.0
        } else if lon >= 0.0 {
            lon - half
        } else {
            lon + half
        };
        nearest[r] = Some((dist, p, o.speed()));
    }
    let mut values = vec![ego.speed];
    let mut occupied = false;
    for (r, slot) in nearest.iter().enumerate() {
        let range = if r < 3 { spec.front() } else { spec.rear() };
        match slot {
            Some((_, p, v)) if range.contains(*p) && spec.v.contains(*v) => {
                occupied = true;
                values.extend([*p, *v]);
            }
            _ => values.extend([if r < 3 { range.hi } else { range.lo }, ego.speed]),
        }
    }
    occupied.then_some(values)
}

/// Pedestrian offsets from the front corners.
pub fn extract_vehicle_pedestrian(d: &Dataset, spec: &OssSpec) -> Result<Vec<StateTrajectory>, OssError> {
    if spec.kind != OssKind::Combined {
        spec.expect(OssKind::VehiclePedestrian)?;
    } else {
        spec.validate()?;
    }
    Ok(extract(d, &OssSpec { kind: OssKind::VehiclePedestrian, ..spec.clone() }, |ego, others| {
        pedestrian_values(ego, others, spec)
    }))
}

fn pedestrian_values(ego: &Ego, others: &[&RawSample], spec: &OssSpec) -> Option<Vec<f64>> {
    // (distance, p, q) per corner: left then right.
    let mut nearest: [Option<(f64, f64, f64)>; 2] = [None; 2];
    for o in others.iter().filter(|o| !o.agent_type.is_vehicle()) {
        let (lon, lat) = ego.local(o);
        if lon < ego.half_len {
            continue;
        }
        let side = usize::from(lat < 0.0);
        let corner_lat = if side == 0 { ego.half_wid } else { -ego.half_wid };
        let p = lon - ego.half_len;
        let q = libm::fabs(lat - corner_lat);
        let dist = libm::hypot(p, q);
        if nearest[side].is_none_or(|(d, _, _)| dist < d) {
            nearest[side] = Some((dist, p, q));
        }
    }
    let mut values = vec![ego.speed];
    let mut occupied = false;
    for slot in nearest {
        match slot {
            Some((_, p, q)) if spec.ped_p().contains(p) && spec.ped_q().contains(q) => {
                occupied = true;
                values.extend([p, q]);
            }
            _ => values.extend([spec.p.hi, spec.q_max]),
        }
    }
    occupied.then_some(values)
}

/// Concatenates a multi-vehicle and a pedestrian extraction frame by frame,
/// keeping the shared `v0` once.
pub fn combine_domains(a: &[StateTrajectory], b: &[StateTrajectory]) -> Result<Vec<StateTrajectory>, OssError> {
    let mut index: BTreeMap<(&str, u64), &OssState> = BTreeMap::new();
    for t in b {
        for s in &t.states {
            if s.values.len() != 5 {
                return Err(OssError::DimensionMismatch { expected: 5, got: s.values.len() });
            }
            index.insert((s.trajectory_id.as_str(), s.frame), s);
        }
    }
    let mut out = Vec::new();
    for t in a {
        let mut states = Vec::new();
        for s in &t.states {
            if s.values.len() != 13 {
                return Err(OssError::DimensionMismatch { expected: 13, got: s.values.len() });
            }
            let Some(p) = index.get(&(s.trajectory_id.as_str(), s.frame)) else {
                continue;
            };
            let v0 = s.values[0];
            if libm::fabs(p.values[0] - v0) > 1e-9 * v0.abs().max(1.0) {
                return Err(OssError::FrameMisalignment { trajectory_id: s.trajectory_id.clone(), frame: s.frame });
            }
            let mut values = s.values.clone();
            values.extend_from_slice(&p.values[1..]);
            states.push(OssState {
                values,
                time: s.time,
                frame: s.frame,
                trajectory_id: s.trajectory_id.clone(),
                is_unsafe: s.is_unsafe || p.is_unsafe,
            });
        }
        if !states.is_empty() {
            out.push(StateTrajectory::from_states(t.trajectory_id.clone(), states));
        }
    }
    Ok(out)
}

/// Dispatches on the spec kind.
pub fn extract_states(d: &Dataset, spec: &OssSpec) -> Result<Vec<StateTrajectory>, OssError> {
    match spec.kind {
        OssKind::LeadFollowing => extract_lead_following(d, spec),
        OssKind::MultiVehicle => extract_multi_vehicle(d, spec),
        OssKind::VehiclePedestrian => extract_vehicle_pedestrian(d, spec),
        OssKind::Combined => combine_domains(&extract_multi_vehicle(d, spec)?, &extract_vehicle_pedestrian(d, spec)?),
    }
}
