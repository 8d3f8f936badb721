use alloc::vec;
use alloc::vec::Vec;

use super::{GeometryError, Membership};

const FEAS_TOL: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-12;

/// Convex hull of a point set, queried by linear programming.
///
/// A point `q` is a member when it is a convex combination of the stored
/// points, decided by phase one of the simplex method on
/// `sum_i l_i p_i = q, sum_i l_i = 1, l >= 0`. Used for clusters whose
/// intrinsic dimension is too high to triangulate.
#[derive(Debug, Clone)]
pub struct HullRegion {
    dim: usize,
    points: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl HullRegion {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let dim = points.first().map(|p| p.len()).ok_or(GeometryError::InvalidArgument("empty point set"))?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(GeometryError::DimensionMismatch { expected: dim, got: 0 });
        }
        let (lo, hi) = super::bounding_box(&points, dim);
        Ok(Self { dim, points, lo, hi })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    fn in_hull(&self, q: &[f64]) -> bool {
        if self.points.iter().any(|p| p.as_slice() == q) {
            return true;
        }
        let m = self.dim + 1;
        let n = self.points.len();
        let w = n + m + 1;
        let rhs = w - 1;
        let mut t = vec![0.0; (m + 1) * w];
        for r in 0..m {
            let b = if r < self.dim { q[r] } else { 1.0 };
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            for (j, p) in self.points.iter().enumerate() {
                t[r * w + j] = sign * if r < self.dim { p[r] } else { 1.0 };
            }
            t[r * w + n + r] = 1.0;
            t[r * w + rhs] = sign * b;
        }
        for j in (0..n).chain(core::iter::once(rhs)) {
            let s: f64 = (0..m).map(|r| t[r * w + j]).sum();
            t[m * w + j] = -s;
        }
        let mut basis: Vec<usize> = (n..n + m).collect();
        let bland_after = 50 * m + 100;
        for iter in 0..(200 * m + 2000) {
            let entering = if iter < bland_after {
                let mut best = (usize::MAX, -PIVOT_EPS);
                for j in 0..n + m {
                    if t[m * w + j] < best.1 {
                        best = (j, t[m * w + j]);
                    }
                }
                best.0
            } else {
                (0..n + m).find(|&j| t[m * w + j] < -PIVOT_EPS).unwrap_or(usize::MAX)
            };
            if entering == usize::MAX {
                break;
            }
            let mut leave = usize::MAX;
            let mut ratio = f64::INFINITY;
            for r in 0..m {
                let a = t[r * w + entering];
                if a > PIVOT_EPS {
                    let q = t[r * w + rhs] / a;
                    if q < ratio || (q == ratio && leave != usize::MAX && basis[r] < basis[leave]) {
                        ratio = q;
                        leave = r;
                    }
                }
            }
            if leave == usize::MAX {
                break;
            }
            let piv = t[leave * w + entering];
            for j in 0..w {
                t[leave * w + j] /= piv;
            }
            for r in 0..=m {
                if r == leave {
                    continue;
                }
                let f = t[r * w + entering];
                if f != 0.0 {
                    for j in 0..w {
                        t[r * w + j] -= f * t[leave * w + j];
                    }
                }
            }
            basis[leave] = entering;
        }
        -t[m * w + rhs] <= FEAS_TOL
    }
}

impl Membership for HullRegion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, p: &[f64]) -> Result<bool, GeometryError> {
        if p.len() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        if !super::in_box(p, &self.lo, &self.hi, FEAS_TOL) {
            return Ok(false);
        }
        Ok(self.in_hull(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_membership() {
        let h = HullRegion::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(h.contains(&[0.2, 0.2]).unwrap());
        assert!(h.contains(&[0.5, 0.5]).unwrap());
        assert!(!h.contains(&[0.6, 0.6]).unwrap());
        assert!(h.contains(&[1.0, 0.0]).unwrap());
        assert!(!h.contains(&[-0.1, 0.5]).unwrap());
    }

    #[test]
    fn cube_interior_in_high_dimension() {
        let d = 8;
        let mut pts = Vec::new();
        for mask in 0u32..(1 << d) {
            pts.push((0..d).map(|i| f64::from((mask >> i) & 1)).collect::<Vec<f64>>());
        }
        let h = HullRegion::new(pts).unwrap();
        assert!(h.contains(&vec![0.5; d]).unwrap());
        assert!(h.contains(&vec![0.999; d]).unwrap());
        let mut out = vec![0.5; d];
        out[3] = 1.01;
        assert!(!h.contains(&out).unwrap());
    }

    #[test]
    fn segment_in_plane() {
        let h = HullRegion::new(vec![vec![0.0, 0.0], vec![2.0, 2.0]]).unwrap();
        assert!(h.contains(&[1.0, 1.0]).unwrap());
        assert!(!h.contains(&[1.0, 1.1]).unwrap());
    }
}
