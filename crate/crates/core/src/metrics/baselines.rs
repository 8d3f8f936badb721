use serde::{Deserialize, Serialize};

use super::{check_beta, MetricsError};
use crate::oss::StateTrajectory;

pub const TTC_CLIP: f64 = 9.0;
pub const KM_PER_MILE: f64 = 1.609344;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtcStats {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub valid_rate: Option<f64>,
    pub valid: usize,
    pub total: usize,
}

/// Time-to-collision for one `[v0, v1, p]` state.
pub fn ttc(values: &[f64]) -> Option<f64> {
    let (v0, v1, p) = (values[0], values[1], values[2]);
    (v0 > v1 && p > 0.0).then(|| (p / (v0 - v1)).min(TTC_CLIP))
}

/// Clipped TTC statistics over lead-following states. Mean and population
/// standard deviation cover valid states only.
pub fn ttc_stats(ts: &[StateTrajectory]) -> TtcStats {
    let mut total = 0usize;
    let mut valid = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let vals = ts.iter().flat_map(|t| t.states.iter()).filter(|s| s.values.len() >= 3);
    let mut samples = alloc::vec::Vec::new();
    for s in vals {
        total += 1;
        if let Some(t) = ttc(&s.values) {
            valid += 1;
            sum += t;
            samples.push(t);
        }
    }
    let mean = (valid > 0).then(|| sum / valid as f64);
    if let Some(m) = mean {
        for t in &samples {
            sum_sq += (t - m) * (t - m);
        }
    }
    TtcStats {
        mean,
        std: mean.map(|_| libm::sqrt(sum_sq / valid as f64)),
        valid_rate: (total > 0).then(|| valid as f64 / total as f64),
        valid,
        total,
    }
}

/// Per-mile failure-rate bound from collision-free distance:
/// `1 - exp(ln(beta) / miles)`.
pub fn fatality_rate_bound(safe_distance_km: f64, beta: f64, collisions_present: bool) -> Result<f64, MetricsError> {
    check_beta(beta)?;
    if collisions_present {
        return Err(MetricsError::CollisionsPresent);
    }
    if !(safe_distance_km > 0.0 && safe_distance_km.is_finite()) {
        return Err(MetricsError::InvalidDistance);
    }
    let miles = safe_distance_km / KM_PER_MILE;
    Ok(-libm::expm1(libm::log(beta) / miles))
}
