use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::alpha::{alpha_complex, search_optimal_alpha_in, AlphaShape};
use super::cluster::{hierarchical_cluster, ClusterTree};
use super::complex::delaunay;
use super::frame::AffineFrame;
use super::hull::HullRegion;
use super::montecarlo::{mc_volume, McVolume};
use super::{bounding_box, in_box, GeometryError, Membership, DEFAULT_MAX_EXACT_DIM};

const BOX_TOL: f64 = 1e-9;

/// Settings for building a [`ShapeUnion`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionOptions {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub alpha_threshold: f64,
    pub max_exact_dim: usize,
    pub cluster_max: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for UnionOptions {
    fn default() -> Self {
        Self {
            alpha_lo: 0.01,
            alpha_hi: 100.0,
            alpha_threshold: 0.1,
            max_exact_dim: DEFAULT_MAX_EXACT_DIM,
            cluster_max: 100_000,
            mc_samples: 20_000,
            seed: 0,
        }
    }
}

/// Geometry of one cluster.
#[derive(Debug, Clone)]
pub enum RegionShape {
    /// Alpha shape built in the cluster's intrinsic coordinates.
    ///
    /// `searched_alpha` is the search result when the shape was later
    /// tightened to keep excluded points out.
    Alpha { frame: AffineFrame, shape: AlphaShape, single_polytope: bool, monotone: bool, searched_alpha: Option<f64> },
    /// Convex hull, for clusters whose intrinsic dimension exceeds the
    /// triangulation cap.
    Hull { frame: AffineFrame, hull: HullRegion },
    /// All points of the cluster coincide.
    Point(Vec<f64>),
}

impl RegionShape {
    fn contains(&self, p: &[f64]) -> Result<bool, GeometryError> {
        match self {
            RegionShape::Alpha { frame, shape, .. } => {
                if !frame.on_hull(p) {
                    return Ok(false);
                }
                shape.contains(&frame.project(p))
            }
            RegionShape::Hull { hull, .. } => hull.contains(p),
            RegionShape::Point(q) => Ok(p.iter().zip(q).all(|(a, b)| libm::fabs(a - b) <= BOX_TOL)),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RegionShape::Alpha { .. } => "alpha",
            RegionShape::Hull { .. } => "hull",
            RegionShape::Point(_) => "point",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            RegionShape::Alpha { shape, .. } => Some(shape.alpha()),
            _ => None,
        }
    }

    /// Search result of a member whose alpha was later tightened.
    pub fn searched_alpha(&self) -> Option<f64> {
        match self {
            RegionShape::Alpha { searched_alpha, .. } => *searched_alpha,
            _ => None,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            RegionShape::Alpha { frame, .. } | RegionShape::Hull { frame, .. } => frame.dim(),
            RegionShape::Point(_) => 0,
        }
    }
}

/// One cluster's region with its bounding box and measure.
#[derive(Debug, Clone)]
pub struct UnionMember {
    pub region: RegionShape,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub size: usize,
    pub measure: f64,
    /// Half-width of the 95% interval when the measure is estimated.
    pub measure_half_width: f64,
}

impl UnionMember {
    fn contains(&self, p: &[f64]) -> Result<bool, GeometryError> {
        if !in_box(p, &self.lo, &self.hi, BOX_TOL) {
            return Ok(false);
        }
        self.region.contains(p)
    }
}

/// Union of per-cluster regions covering a point set.
#[derive(Debug, Clone)]
pub struct ShapeUnion {
    dim: usize,
    members: Vec<UnionMember>,
    tree: ClusterTree,
    measure: f64,
    half_width: f64,
    overlap: Option<McVolume>,
}

impl ShapeUnion {
    /// Clusters `points` and wraps every cluster in its own region.
    pub fn build(points: &[Vec<f64>], opts: &UnionOptions) -> Result<Self, GeometryError> {
        let dim = points.first().map(|p| p.len()).ok_or(GeometryError::InvalidArgument("empty point set"))?;
        for p in points {
            if p.len() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
        }
        let tree = hierarchical_cluster(points, opts.cluster_max.max(dim + 1), opts.seed)?;
        let jobs: Vec<(usize, &Vec<usize>)> = tree.leaves.iter().enumerate().collect();
        let members = crate::par::map(&jobs, |(leaf, idx)| {
            let pts: Vec<Vec<f64>> = idx.iter().map(|&i| points[i].clone()).collect();
            build_member(pts, opts, *leaf as u64)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        let mut union = Self { dim, members, tree, measure: 0.0, half_width: 0.0, overlap: None };
        union.settle_measure(opts)?;
        Ok(union)
    }

    /// Lowers the alpha of every alpha member that contains an excluded
    /// point to the largest value, within a relative `alpha_threshold`,
    /// at which it contains none. Returns how many members changed.
    pub fn tighten_for_exclusion(&mut self, excluded: &[Vec<f64>], opts: &UnionOptions) -> Result<usize, GeometryError> {
        let jobs: Vec<usize> = (0..self.members.len()).collect();
        let members = &self.members;
        let tightened = crate::par::map(&jobs, |&i| tighten_member(&members[i], excluded, opts));
        let mut changed = 0;
        for (i, t) in tightened.into_iter().enumerate() {
            if let Some(m) = t? {
                self.members[i] = m;
                changed += 1;
            }
        }
        if changed > 0 {
            self.overlap = None;
            self.settle_measure(opts)?;
        }
        Ok(changed)
    }

    fn settle_measure(&mut self, opts: &UnionOptions) -> Result<(), GeometryError> {
        let sum: f64 = self.members.iter().map(|m| m.measure).sum();
        let var: f64 = self.members.iter().map(|m| m.measure_half_width * m.measure_half_width).sum();
        let fat: Vec<&UnionMember> = self.members.iter().filter(|m| m.measure > 0.0).collect();
        let mut touching = false;
        for i in 0..fat.len() {
            for j in i + 1..fat.len() {
                touching |= boxes_overlap(&fat[i].lo, &fat[i].hi, &fat[j].lo, &fat[j].hi);
            }
        }
        if !touching {
            self.measure = sum;
            self.half_width = libm::sqrt(var);
            return Ok(());
        }
        let mut lo = fat[0].lo.clone();
        let mut hi = fat[0].hi.clone();
        for m in &fat[1..] {
            for c in 0..self.dim {
                lo[c] = lo[c].min(m.lo[c]);
                hi[c] = hi[c].max(m.hi[c]);
            }
        }
        // Volume covered by at least two members; exact for pairwise overlaps.
        let overlap = mc_volume(
            |p| fat.iter().filter(|m| m.contains(p).unwrap_or(false)).take(2).count() == 2,
            &lo,
            &hi,
            opts.mc_samples,
            opts.seed ^ 0x5eed_0f0e_71a9,
        )?;
        self.measure = (sum - overlap.estimate).max(0.0);
        self.half_width = libm::sqrt(var + overlap.half_width_95 * overlap.half_width_95);
        self.overlap = Some(overlap);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[UnionMember] {
        &self.members
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    /// Measure of the union (exact unless some member or the overlap was
    /// estimated by Monte Carlo).
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn measure_half_width(&self) -> f64 {
        self.half_width
    }

    pub fn is_exact(&self) -> bool {
        self.half_width == 0.0 && self.overlap.is_none() && self.members.iter().all(|m| !matches!(m.region, RegionShape::Hull { .. }) || m.measure == 0.0)
    }

    pub fn overlap(&self) -> Option<&McVolume> {
        self.overlap.as_ref()
    }

    /// Every alpha member is one polytope and its search was monotone.
    pub fn all_single_polytopes(&self) -> bool {
        self.members.iter().all(|m| match &m.region {
            RegionShape::Alpha { single_polytope, .. } => *single_polytope,
            _ => true,
        })
    }

    pub fn all_searches_monotone(&self) -> bool {
        self.members.iter().all(|m| match &m.region {
            RegionShape::Alpha { monotone, .. } => *monotone,
            _ => true,
        })
    }

    /// Total number of facet-connected components over all members.
    pub fn component_count(&self) -> usize {
        self.members
            .iter()
            .map(|m| match &m.region {
                RegionShape::Alpha { shape, .. } => shape.component_count(),
                _ => 1,
            })
            .sum()
    }
}

impl Membership for ShapeUnion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, p: &[f64]) -> Result<bool, GeometryError> {
        if p.len() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        for m in &self.members {
            if m.contains(p)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn build_member(pts: Vec<Vec<f64>>, opts: &UnionOptions, leaf: u64) -> Result<UnionMember, GeometryError> {
    let dim = pts[0].len();
    let (lo, hi) = bounding_box(&pts, dim);
    let size = pts.len();
    let frame = AffineFrame::fit(&pts);
    let k = frame.dim();
    let full = k == dim;
    let make = |region: RegionShape, measure: f64, hw: f64| UnionMember {
        region,
        lo: lo.clone(),
        hi: hi.clone(),
        size,
        measure,
        measure_half_width: hw,
    };
    if k == 0 {
        return Ok(make(RegionShape::Point(pts[0].clone()), 0.0, 0.0));
    }
    if k <= opts.max_exact_dim {
        let local: Vec<Vec<f64>> = pts.iter().map(|p| frame.project(p)).collect();
        match delaunay(&local, opts.max_exact_dim) {
            Ok(complex) => {
                let complex = Arc::new(complex);
                let (shape, single, monotone) =
                    match search_optimal_alpha_in(complex.clone(), opts.alpha_lo, opts.alpha_hi, opts.alpha_threshold) {
                        Ok(s) => {
                            let m = s.is_monotone();
                            (s.shape, true, m)
                        }
                        Err(GeometryError::InfeasibleAtHi { .. }) => (alpha_complex(complex, opts.alpha_hi), false, true),
                        Err(e) => return Err(e),
                    };
                let measure = if full { shape.measure() } else { 0.0 };
                return Ok(make(RegionShape::Alpha { frame, shape, single_polytope: single, monotone, searched_alpha: None }, measure, 0.0));
            }
            Err(GeometryError::DegenerateInput) => {}
            Err(e) => return Err(e),
        }
    }
    let hull = HullRegion::new(pts)?;
    let (measure, hw) = if full {
        let est = mc_volume(
            |p| hull.contains(p).unwrap_or(false),
            &lo,
            &hi,
            opts.mc_samples,
            opts.seed.wrapping_add(leaf.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
        )?;
        (est.estimate, est.half_width_95)
    } else {
        (0.0, 0.0)
    };
    Ok(make(RegionShape::Hull { frame, hull }, measure, hw))
}

fn tighten_member(m: &UnionMember, excluded: &[Vec<f64>], opts: &UnionOptions) -> Result<Option<UnionMember>, GeometryError> {
    let RegionShape::Alpha { frame, shape, monotone, searched_alpha, .. } = &m.region else {
        return Ok(None);
    };
    let local: Vec<Vec<f64>> = excluded
        .iter()
        .filter(|p| in_box(p, &m.lo, &m.hi, BOX_TOL) && frame.on_hull(p))
        .map(|p| frame.project(p))
        .collect();
    let violates = |s: &AlphaShape| -> Result<bool, GeometryError> {
        for p in &local {
            if s.contains(p)? {
                return Ok(true);
            }
        }
        Ok(false)
    };
    if !violates(shape)? {
        return Ok(None);
    }
    let complex = shape.complex_arc();
    let mut lo = opts.alpha_lo.min(shape.alpha());
    let mut hi = shape.alpha();
    let mut best = alpha_complex(complex.clone(), lo);
    if violates(&best)? {
        best = alpha_complex(complex.clone(), 0.0);
        if violates(&best)? {
            return Ok(None);
        }
    } else {
        while hi > lo * (1.0 + opts.alpha_threshold) {
            let mid = libm::sqrt(lo * hi);
            let s = alpha_complex(complex.clone(), mid);
            if violates(&s)? {
                hi = mid;
            } else {
                lo = mid;
                best = s;
            }
        }
    }
    let full = frame.dim() == m.lo.len();
    let single = best.is_single_polytope();
    let measure = if full { best.measure() } else { 0.0 };
    Ok(Some(UnionMember {
        region: RegionShape::Alpha {
            frame: frame.clone(),
            shape: best,
            single_polytope: single,
            monotone: *monotone,
            searched_alpha: searched_alpha.or(Some(shape.alpha())),
        },
        lo: m.lo.clone(),
        hi: m.hi.clone(),
        size: m.size,
        measure,
        measure_half_width: 0.0,
    }))
}

fn boxes_overlap(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> bool {
    alo.iter().zip(ahi).zip(blo.iter().zip(bhi)).all(|((al, ah), (bl, bh))| al <= bh && bl <= ah)
}

/// True when no excluded point lies in `shape`.
pub fn check_exclusion<M: Membership + Sync>(shape: &M, excluded: &[Vec<f64>]) -> Result<bool, GeometryError> {
    let hits = crate::par::map(excluded, |p| shape.contains(p));
    for h in hits {
        if h? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid(ox: f64, n: usize) -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                pts.push(vec![ox + i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64]);
            }
        }
        pts
    }

    #[test]
    fn single_cluster_matches_plain_shape() {
        let pts = grid(0.0, 5);
        let u = ShapeUnion::build(&pts, &UnionOptions::default()).unwrap();
        assert_eq!(u.members().len(), 1);
        assert!((u.measure() - 1.0).abs() < 1e-12);
        assert!(u.is_exact());
        for p in &pts {
            assert!(u.contains(p).unwrap());
        }
        assert!(!u.contains(&[1.5, 0.5]).unwrap());
    }

    #[test]
    fn disjoint_clusters_add_exactly() {
        let mut pts = grid(0.0, 5);
        pts.extend(grid(5.0, 5));
        let opts = UnionOptions { cluster_max: 30, ..UnionOptions::default() };
        let u = ShapeUnion::build(&pts, &opts).unwrap();
        assert_eq!(u.members().len(), 2);
        assert!((u.measure() - 2.0).abs() < 1e-12);
        assert!(u.overlap().is_none());
        assert!(u.contains(&[5.5, 0.5]).unwrap());
        assert!(!u.contains(&[3.0, 0.5]).unwrap());
    }

    #[test]
    fn flat_cluster_in_three_space() {
        let pts: Vec<Vec<f64>> = grid(0.0, 4).into_iter().map(|p| vec![p[0], p[1], 0.25]).collect();
        let u = ShapeUnion::build(&pts, &UnionOptions::default()).unwrap();
        assert_eq!(u.members()[0].region.intrinsic_dim(), 2);
        assert_eq!(u.measure(), 0.0);
        assert!(u.contains(&[0.5, 0.5, 0.25]).unwrap());
        assert!(!u.contains(&[0.5, 0.5, 0.3]).unwrap());
    }

    #[test]
    fn high_dimensional_cluster_uses_hull() {
        let d = 8;
        let mut pts = vec![vec![0.0; d]];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            pts.push(e);
        }
        let opts = UnionOptions { mc_samples: 2000, ..UnionOptions::default() };
        let u = ShapeUnion::build(&pts, &opts).unwrap();
        assert_eq!(u.members()[0].region.kind(), "hull");
        assert!(u.contains(&vec![0.1; d]).unwrap());
        assert!(!u.contains(&vec![0.2; d]).unwrap());
    }

    #[test]
    fn exclusion() {
        let pts = grid(0.0, 5);
        let u = ShapeUnion::build(&pts, &UnionOptions::default()).unwrap();
        assert!(check_exclusion(&u, &[vec![3.0, 3.0]]).unwrap());
        assert!(!check_exclusion(&u, &[vec![3.0, 3.0], vec![0.3, 0.6]]).unwrap());
        assert!(check_exclusion(&u, &[]).unwrap());
    }
}
