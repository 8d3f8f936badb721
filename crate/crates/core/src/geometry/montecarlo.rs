use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GeometryError;

const BATCH: usize = 4096;
/// Smallest accepted sample count.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McVolume {
    pub estimate: f64,
    pub half_width_95: f64,
    pub hits: usize,
    pub samples: usize,
}

/// Hit-or-miss volume estimate of a region inside the box `[lo, hi]`.
///
/// Samples are drawn in batches, each from its own ChaCha stream derived
/// from `seed`, so the estimate does not depend on how batches are
/// scheduled.
pub fn mc_volume<F>(member: F, lo: &[f64], hi: &[f64], n_samples: usize, seed: u64) -> Result<McVolume, GeometryError>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    if n_samples < MIN_SAMPLES {
        return Err(GeometryError::InvalidArgument("at least 1000 Monte-Carlo samples are required"));
    }
    if lo.len() != hi.len() {
        return Err(GeometryError::DimensionMismatch { expected: lo.len(), got: hi.len() });
    }
    if lo.iter().chain(hi).any(|v| !v.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let volume: f64 = lo.iter().zip(hi).map(|(l, h)| (h - l).max(0.0)).product();
    let batches: Vec<usize> = (0..n_samples.div_ceil(BATCH)).collect();
    let run = |b: &usize| -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(*b as u64);
        let count = BATCH.min(n_samples - b * BATCH);
        let mut p = alloc::vec![0.0; lo.len()];
        let mut hits = 0;
        for _ in 0..count {
            for (c, x) in p.iter_mut().enumerate() {
                *x = lo[c] + rng.gen::<f64>() * (hi[c] - lo[c]);
            }
            if member(&p) {
                hits += 1;
            }
        }
        hits
    };
    let hits: usize = crate::par::map(&batches, run).into_iter().sum();
    let p_hat = hits as f64 / n_samples as f64;
    Ok(McVolume {
        estimate: volume * p_hat,
        half_width_95: 1.96 * volume * libm::sqrt(p_hat * (1.0 - p_hat) / n_samples as f64),
        hits,
        samples: n_samples,
    })
}
