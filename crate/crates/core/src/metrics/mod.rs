//! Almost-invariance certificates, coverage and baseline safety metrics.

mod baselines;
mod epsilon;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baselines::{fatality_rate_bound, ttc, ttc_stats, TtcStats, KM_PER_MILE, TTC_CLIP};
pub use epsilon::{
    loop_epsilon_bar, count_trailing_safe, epsilon_bar_bruteforce, epsilon_bar_exact, epsilon_from_count,
    trailing_run, trailing_run_pmf, BRUTEFORCE_CAP,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("beta must lie in (0, 1), got {0}")]
    InvalidBeta(f64),
    #[error("invalid transition counts: {0}")]
    InvalidCounts(&'static str),
    #[error("{len} labels exceed the enumeration cap {cap}")]
    TooLarge { len: usize, cap: usize },
    #[error("state space volume must be positive")]
    EmptySpace,
    #[error("mileage bound is undefined when the data contains collisions")]
    CollisionsPresent,
    #[error("safe distance must be positive")]
    InvalidDistance,
}

pub(crate) fn check_beta(beta: f64) -> Result<(), MetricsError> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(MetricsError::InvalidBeta(beta))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonResult {
    pub beta: f64,
    pub confidence: f64,
    /// Trailing safe run of the recorded replay order.
    pub n_trailing: Option<usize>,
    pub s_count: usize,
    pub c_count: usize,
    /// Expectation as computed by the quantification loop.
    pub epsilon_bar_loop: f64,
    /// Expectation of the bound over uniformly random replays.
    pub epsilon_bar_exact: f64,
    /// Bound for the recorded replay alone.
    pub epsilon_single: Option<f64>,
}

impl EpsilonResult {
    pub fn compute(s: usize, c: usize, n_trailing: Option<usize>, beta: f64) -> Result<Self, MetricsError> {
        check_beta(beta)?;
        let total = s + c;
        let looped = if total == 0 { 1.0 } else { loop_epsilon_bar(s, total, beta)? };
        let exact = if total == 0 { 1.0 } else { epsilon_bar_exact(s, c, beta)? };
        let single = n_trailing.map(|n| epsilon_from_count(n, beta)).transpose()?;
        Ok(Self {
            beta,
            confidence: 1.0 - beta,
            n_trailing,
            s_count: s,
            c_count: c,
            epsilon_bar_loop: looped,
            epsilon_bar_exact: exact,
            epsilon_single: single,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// States per unit of shape volume; absent for a zero-volume shape.
    pub density: Option<f64>,
    pub occupancy: f64,
    pub ds_cardinality: usize,
    pub shape_measure: f64,
    pub space_measure: f64,
}

/// Density `|D_s| / |shape|` and occupancy `|shape| / |S|`.
pub fn coverage(ds_count: usize, shape_measure: f64, space_measure: f64) -> Result<CoverageResult, MetricsError> {
    if !(space_measure > 0.0 && space_measure.is_finite()) {
        return Err(MetricsError::EmptySpace);
    }
    let shape_measure = shape_measure.max(0.0);
    Ok(CoverageResult {
        density: (shape_measure > 0.0).then(|| ds_count as f64 / shape_measure),
        occupancy: shape_measure / space_measure,
        ds_cardinality: ds_count,
        shape_measure,
        space_measure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub ttc_mean: Option<f64>,
    pub ttc_std: Option<f64>,
    pub ttc_valid_rate: Option<f64>,
    pub safe_distance_km: Option<f64>,
    pub fatality_bound: Option<f64>,
}
