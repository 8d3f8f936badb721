//! Synthetic lead-following data: an IDM subject vehicle behind a scripted
//! lead on a straight single-lane road.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{AgentType, CollisionEvent, Dataset, IngestError, RawSample};

pub const DEFAULT_DT: f64 = 0.04;
pub const VEHICLE_LENGTH: f64 = 4.5;
pub const VEHICLE_WIDTH: f64 = 1.8;
pub const BATTERY_SIZE: usize = 48;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("gap must be positive, got {0}")]
    NonPositiveGap(f64),
    #[error("invalid IDM parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Intelligent Driver Model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    /// Minimum standstill gap, meters.
    pub s0: f64,
    /// Time headway, seconds.
    pub time_headway: f64,
    pub b_max: f64,
    pub v_free: f64,
    pub a_max: f64,
    pub b_comf: f64,
    pub delta: f64,
}

pub const IDM_0: IdmParams =
    IdmParams { s0: 0.5, time_headway: 0.1, b_max: 9.0, v_free: 25.0, a_max: 0.73, b_comf: 1.67, delta: 4.0 };
pub const IDM_1: IdmParams =
    IdmParams { s0: 4.0, time_headway: 4.0, b_max: 2.0, v_free: 25.0, a_max: 0.73, b_comf: 1.67, delta: 4.0 };

impl IdmParams {
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "idm0" | "IDM_0" => Some(IDM_0),
            "idm1" | "IDM_1" => Some(IDM_1),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let all = [self.s0, self.time_headway, self.b_max, self.v_free, self.a_max, self.b_comf, self.delta];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SimError::InvalidParams("parameters must be finite and non-negative"));
        }
        if self.v_free <= 0.0 || self.b_comf <= 0.0 || self.delta <= 0.0 {
            return Err(SimError::InvalidParams("v_free, b_comf and delta must be positive"));
        }
        Ok(())
    }
}

/// IDM acceleration for speed `v`, bumper gap `gap` and closing speed `dv`,
/// clamped to `[-b_max, a_max]`.
pub fn idm_accel(p: &IdmParams, v: f64, gap: f64, dv: f64) -> Result<f64, SimError> {
    if !(gap > 0.0) {
        return Err(SimError::NonPositiveGap(gap));
    }
    if p.a_max == 0.0 {
        return Ok(0.0);
    }
    let interaction = v * dv / (2.0 * libm::sqrt(p.a_max * p.b_comf));
    let s_star = (p.s0 + v * p.time_headway + interaction).max(p.s0);
    let free = libm::pow(v.max(0.0) / p.v_free, p.delta);
    let ratio = s_star / gap;
    let a = p.a_max * (1.0 - free - ratio * ratio);
    Ok(a.clamp(-p.b_max, p.a_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    StationaryLead,
    SlowerLead,
    BrakingLead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub sv_speed0: f64,
    pub lead_speed0: f64,
    /// Bumper-to-bumper distance at t = 0, meters.
    pub initial_gap: f64,
    /// Lead deceleration magnitude, braking scenarios only.
    pub lead_decel: f64,
    pub duration: f64,
    pub dt: f64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let all = [self.sv_speed0, self.lead_speed0, self.initial_gap, self.lead_decel, self.duration, self.dt];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(SimError::InvalidScenario("non-finite value"));
        }
        if self.initial_gap <= 0.0 {
            return Err(SimError::InvalidScenario("initial gap must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(SimError::InvalidScenario("dt must lie in (0, 0.1]"));
        }
        if self.sv_speed0 < 0.0 || self.lead_speed0 < 0.0 || self.lead_decel < 0.0 || self.duration < 0.0 {
            return Err(SimError::InvalidScenario("speeds, deceleration and duration must be non-negative"));
        }
        Ok(())
    }
}

/// Simulated samples and the collision frame, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub samples: Vec<RawSample>,
    pub collision: Option<CollisionEvent>,
}

fn sample(tid: &str, agent: &str, frame: u64, dt: f64, x: f64, v: f64, sv: bool) -> RawSample {
    RawSample {
        recording_id: "sim".to_string(),
        trajectory_id: tid.to_string(),
        frame,
        time: frame as f64 * dt,
        agent_id: agent.to_string(),
        agent_type: AgentType::Car,
        x,
        y: 0.0,
        vx: v,
        vy: 0.0,
        length: VEHICLE_LENGTH,
        width: VEHICLE_WIDTH,
        lane_id: Some(1),
        sv_flag: sv,
    }
}

/// One step under constant acceleration `a`: displacement and new speed.
/// A vehicle that would reverse stops where its speed reaches zero.
fn step(v: f64, a: f64, dt: f64) -> (f64, f64) {
    let nv = v + a * dt;
    if nv < 0.0 {
        (-v * v / (2.0 * a), 0.0)
    } else {
        (v * dt + 0.5 * a * dt * dt, nv)
    }
}

/// Forward-Euler rollout (speed integrated explicitly, position exact for
/// the step's constant acceleration) of one scenario under trajectory id `tid`.
pub fn rollout(sv: &IdmParams, sc: &ScenarioSpec, tid: &str) -> Result<Rollout, SimError> {
    sv.validate()?;
    sc.validate()?;
    let steps = libm::floor(sc.duration / sc.dt + 1e-9) as u64;
    let mut x0 = 0.0;
    let mut v0 = sc.sv_speed0;
    let mut x1 = sc.initial_gap + VEHICLE_LENGTH;
    let mut v1 = match sc.kind {
        ScenarioKind::StationaryLead => 0.0,
        _ => sc.lead_speed0,
    };
    let mut samples = Vec::with_capacity(2 * steps as usize + 2);
    let mut collision = None;
    for frame in 0..=steps {
        samples.push(sample(tid, "sv", frame, sc.dt, x0, v0, true));
        samples.push(sample(tid, "lead", frame, sc.dt, x1, v1, false));
        let gap = x1 - x0 - VEHICLE_LENGTH;
        if gap <= 0.0 {
            collision = Some(CollisionEvent { trajectory_id: tid.to_string(), frame });
            break;
        }
        let a0 = idm_accel(sv, v0, gap, v0 - v1)?;
        let a1 = match sc.kind {
            ScenarioKind::BrakingLead => -sc.lead_decel,
            _ => 0.0,
        };
        let (dx0, nv0) = step(v0, a0, sc.dt);
        let (dx1, nv1) = step(v1, a1, sc.dt);
        x0 += dx0;
        x1 += dx1;
        v0 = nv0;
        v1 = nv1;
    }
    Ok(Rollout { samples, collision })
}

/// Single-scenario dataset.
pub fn simulate_follow(sv: &IdmParams, sc: &ScenarioSpec) -> Result<Dataset, SimError> {
    let r = rollout(sv, sc, "scenario")?;
    Ok(Dataset::new(r.samples, r.collision.into_iter().collect())?)
}

/// The 48-cell surrogate grid: 16 stationary, 16 slower and 16 braking
/// leads over subject speeds 10..=25 m/s. `grid_seed` jitters gaps by up to
/// half a meter and speeds by up to a quarter m/s.
pub fn ncap_scenarios(grid_seed: u64) -> Vec<(String, ScenarioSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(grid_seed);
    let decels = [2.0, 4.0, 6.0];
    let gaps = [12.0, 24.0, 36.0];
    let mut out = Vec::with_capacity(BATTERY_SIZE);
    for (g, kind) in [ScenarioKind::StationaryLead, ScenarioKind::SlowerLead, ScenarioKind::BrakingLead]
        .into_iter()
        .enumerate()
    {
        for i in 0..16 {
            let speed = 10.0 + i as f64 + rng.gen_range(-0.25..=0.25);
            let gap_jitter = rng.gen_range(-0.5..=0.5);
            let (lead_speed0, initial_gap, lead_decel) = match kind {
                ScenarioKind::StationaryLead => (0.0, 30.0, 0.0),
                ScenarioKind::SlowerLead => (0.5 * speed, 30.0, 0.0),
                ScenarioKind::BrakingLead => (speed, gaps[i % 3], decels[i % 3]),
            };
            let spec = ScenarioSpec {
                kind,
                sv_speed0: speed,
                lead_speed0,
                initial_gap: initial_gap + gap_jitter,
                lead_decel,
                duration: 12.0,
                dt: DEFAULT_DT,
            };
            out.push((format!("ncap-{g}-{i:02}"), spec));
        }
    }
    out
}

/// Runs every battery scenario and concatenates them into one dataset.
pub fn ncap_battery(sv: &IdmParams, grid_seed: u64) -> Result<Dataset, SimError> {
    let scenarios = ncap_scenarios(grid_seed);
    let runs = crate::par::map(&scenarios, |(tid, sc)| rollout(sv, sc, tid));
    let mut samples = Vec::new();
    let mut events = Vec::new();
    for r in runs {
        let r = r?;
        samples.extend(r.samples);
        events.extend(r.collision);
    }
    Ok(Dataset::new(samples, events)?)
}
