use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::delaunay::DEGENERACY_TOL;
use super::simplex::dist_sq;

/// Orthonormal frame of the affine hull of a point set.
///
/// The intrinsic dimension is found greedily: starting from the first
/// point, the point farthest from the current affine span is added until
/// the largest residual drops below `DEGENERACY_TOL` times the extent.
/// A full-dimensional set keeps the identity frame so coordinates pass
/// through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFrame {
    ambient: usize,
    origin: Vec<f64>,
    basis: Option<Vec<Vec<f64>>>,
    tol: f64,
}

impl AffineFrame {
    pub fn identity(n: usize) -> Self {
        Self { ambient: n, origin: vec![0.0; n], basis: None, tol: 0.0 }
    }

    pub fn fit(points: &[Vec<f64>]) -> Self {
        let n = points.first().map_or(0, |p| p.len());
        if points.is_empty() {
            return Self::identity(n);
        }
        let (lo, hi) = super::bounding_box(points, n);
        let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
        let tol = DEGENERACY_TOL * extent;
        let origin = points[0].clone();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        while basis.len() < n {
            let mut best = (0usize, -1.0f64);
            for (i, p) in points.iter().enumerate() {
                let r = residual(&origin, &basis, p);
                let r2: f64 = r.iter().map(|x| x * x).sum();
                if r2 > best.1 {
                    best = (i, r2);
                }
            }
            let norm = libm::sqrt(best.1);
            if norm <= tol {
                break;
            }
            let r = residual(&origin, &basis, &points[best.0]);
            basis.push(r.iter().map(|x| x / norm).collect());
        }
        if basis.len() == n {
            return Self::identity(n);
        }
        Self { ambient: n, origin, basis: Some(basis), tol: 2.0 * tol }
    }

    /// Ambient dimension.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        self.basis.as_ref().map_or(self.ambient, |b| b.len())
    }

    pub fn is_identity(&self) -> bool {
        self.basis.is_none()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Coordinates of `p` in the frame (orthogonal projection).
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        match &self.basis {
            None => p.to_vec(),
            Some(b) => b
                .iter()
                .map(|e| e.iter().zip(p.iter().zip(&self.origin)).map(|(a, (x, o))| a * (x - o)).sum())
                .collect(),
        }
    }

    /// Maps frame coordinates back to the ambient space.
    pub fn lift(&self, c: &[f64]) -> Vec<f64> {
        match &self.basis {
            None => c.to_vec(),
            Some(b) => {
                let mut out = self.origin.clone();
                for (e, &t) in b.iter().zip(c) {
                    for (o, a) in out.iter_mut().zip(e) {
                        *o += t * a;
                    }
                }
                out
            }
        }
    }

    /// Distance from `p` to the affine hull.
    pub fn residual(&self, p: &[f64]) -> f64 {
        match &self.basis {
            None => 0.0,
            Some(_) => libm::sqrt(dist_sq(&self.lift(&self.project(p)), p)),
        }
    }

    /// Whether `p` lies on the affine hull within the fit tolerance.
    pub fn on_hull(&self, p: &[f64]) -> bool {
        self.residual(p) <= self.tol
    }
}

fn residual(origin: &[f64], basis: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = p.iter().zip(origin).map(|(x, o)| x - o).collect();
    for e in basis {
        let t: f64 = r.iter().zip(e).map(|(a, b)| a * b).sum();
        for (x, a) in r.iter_mut().zip(e) {
            *x -= t * a;
        }
    }
    r
}
