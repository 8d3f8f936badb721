use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Per-dimension affine map of a box onto the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Normalizer {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return Err(GeometryError::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if lo.iter().zip(&hi).any(|(l, h)| h <= l) {
            return Err(GeometryError::InvalidArgument("every interval must have positive length"));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn forward(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(self.lo.iter().zip(&self.hi)).map(|(x, (l, h))| (x - l) / (h - l)).collect()
    }

    pub fn inverse(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(self.lo.iter().zip(&self.hi)).map(|(x, (l, h))| l + x * (h - l)).collect()
    }

    /// Factor converting a normalized volume back to physical units.
    pub fn volume_scale(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}
