//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use safeset_core::ingest::{AgentType, CollisionEvent, Dataset, RawSample};

pub const LANE_WIDTH: f64 = 3.75;
pub const FRAMES_PER_TRAJECTORY: u64 = 500;
pub const TRAJECTORIES: u64 = 4;

fn car(tid: &str, agent: &str, frame: u64, x: f64, y: f64, v: f64, lane: i64, sv: bool) -> RawSample {
    RawSample {
        recording_id: "multilane".into(),
        trajectory_id: tid.into(),
        frame,
        time: frame as f64 * 0.04,
        agent_id: agent.into(),
        agent_type: AgentType::Car,
        x,
        y,
        vx: v,
        vy: 0.0,
        length: 4.5,
        width: 1.8,
        lane_id: Some(lane),
        sv_flag: sv,
    }
}

/// Three-lane highway, 2000 frames in four trajectories. The subject drives
/// the centre lane; one scripted neighbour per subregion oscillates around
/// it and periodically leaves the sensing range. The last trajectory runs
/// slower and ends with the front-centre car closing the gap to zero.
pub fn multilane() -> Dataset {
    let dt = 0.04;
    // (longitudinal side, lane) per subregion fl, fc, fr, rl, rc, rr.
    let slots: [(f64, i64); 6] = [(1.0, 3), (1.0, 2), (1.0, 1), (-1.0, 3), (-1.0, 2), (-1.0, 1)];
    let mut samples = Vec::new();
    let mut events = Vec::new();
    for k in 0..TRAJECTORIES {
        let tid = format!("lane-{k}");
        let crash = k == TRAJECTORIES - 1;
        let n = FRAMES_PER_TRAJECTORY;
        let span = (n - 1) as f64 * dt;
        let mut x0 = 0.0;
        for f in 0..n {
            let t = f as f64 * dt;
            let v0 = if crash { 21.0 + 0.8 * (0.3 * t).sin() } else { 26.5 + 2.0 * (0.25 * t + k as f64).sin() };
            samples.push(car(&tid, "sv", f, x0, 0.0, v0, 2, true));
            for (r, (side, lane)) in slots.iter().enumerate() {
                let phase = 0.7 * r as f64 + 1.3 * k as f64;
                let w = 0.15 + 0.04 * r as f64;
                let (lon, dlon) = if crash && r == 1 {
                    (34.5 - 30.0 * t / span, -30.0 / span)
                } else {
                    (side * (22.0 + 18.0 * (w * t + phase).sin()), side * 18.0 * w * (w * t + phase).cos())
                };
                let y = (lane - 2) as f64 * LANE_WIDTH;
                samples.push(car(&tid, &format!("n{r}"), f, x0 + lon, y, v0 + dlon, *lane, false));
            }
            x0 += v0 * dt;
        }
        if crash {
            events.push(CollisionEvent { trajectory_id: tid, frame: n - 1 });
        }
    }
    Dataset::new(samples, events).expect("fixture is valid")
}
