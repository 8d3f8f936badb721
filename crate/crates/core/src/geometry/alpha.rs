use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::complex::{delaunay, SimplicialComplex};
use super::delaunay::{Location, INFINITE_VERTEX};
use super::simplex::{barycentric, min_enclosing_ball};
use super::{GeometryError, Membership};

/// Barycentric slack accepted for points just outside an included cell.
const BARY_TOL: f64 = -1e-9;

/// Alpha complex of a Delaunay triangulation at a fixed radius.
#[derive(Debug, Clone)]
pub struct AlphaShape {
    alpha: f64,
    complex: Arc<SimplicialComplex>,
    included: Vec<bool>,
    n_included: usize,
    uncovered: usize,
    component_count: usize,
    measure: f64,
}

/// Filters `complex` at `alpha`.
pub fn alpha_complex(complex: Arc<SimplicialComplex>, alpha: f64) -> AlphaShape {
    let n_top = complex.num_top();
    let included: Vec<bool> = (0..n_top).map(|i| complex.top_radius(i) <= alpha).collect();
    let mut measure = 0.0;
    let mut n_included = 0;
    let mut covered = vec![false; complex.num_points()];
    let mut uf = UnionFind::new(n_top);
    for i in 0..n_top {
        if !included[i] {
            continue;
        }
        n_included += 1;
        measure += complex.top_volume(i);
        for &v in complex.top(i) {
            covered[v as usize] = true;
        }
        for j in complex.top_neighbors(i) {
            if included[j] {
                uf.union(i, j);
            }
        }
    }
    let cell_components = (0..n_top).filter(|&i| included[i] && uf.find(i) == i).count();
    let uncovered = covered.iter().filter(|c| !**c).count();
    AlphaShape {
        alpha,
        complex,
        included,
        n_included,
        uncovered,
        component_count: cell_components + uncovered,
        measure,
    }
}

impl AlphaShape {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub(crate) fn complex_arc(&self) -> Arc<SimplicialComplex> {
        self.complex.clone()
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    /// Sum of the volumes of the included top simplices.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Connected components: included top simplices joined across shared
    /// facets, plus every vertex not covered by an included top simplex.
    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn num_included(&self) -> usize {
        self.n_included
    }

    pub fn is_included(&self, top: usize) -> bool {
        self.included[top]
    }

    /// Vertex tuples of the included top simplices.
    pub fn included_simplices(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.included.len()).filter(|&i| self.included[i]).map(|i| self.complex.top(i))
    }

    /// True when every vertex lies in an included top simplex and the
    /// included simplices form one facet-connected piece.
    pub fn is_single_polytope(&self) -> bool {
        self.uncovered == 0 && self.component_count == 1
    }

    fn cell_included(&self, c: u32) -> bool {
        self.complex.position(c).is_some_and(|i| self.included[i])
    }

    fn near_included(&self, c: u32, q: &[f64]) -> bool {
        if !self.cell_included(c) {
            return false;
        }
        let pts = self.complex.triangulation().cell_points(c);
        barycentric(&pts, q).is_some_and(|b| b.iter().all(|&l| l >= BARY_TOL))
    }

    fn contains_checked(&self, q: &[f64]) -> bool {
        let tri = self.complex.triangulation();
        let Some((g, loc)) = tri.locate(q) else {
            return false;
        };
        match loc {
            Location::Inside(c) => {
                if self.cell_included(c) {
                    return true;
                }
                // Smallest face carrying the point: the vertices with a
                // non-zero barycentric weight.
                let verts = tri.cell(c);
                let support: Vec<&[f64]> = (0..verts.len())
                    .filter(|&j| tri.orient_replaced(c, j, &g) != Ordering::Equal)
                    .map(|j| tri.vertex(verts[j]))
                    .collect();
                if min_enclosing_ball(&support).radius() <= self.alpha {
                    return true;
                }
                (0..verts.len()).any(|j| {
                    let nb = tri.neighbor(c, j);
                    !tri.is_infinite(nb) && self.near_included(nb, q)
                })
            }
            Location::Outside(inf) => {
                let slot = tri.cell(inf).iter().position(|&v| v == INFINITE_VERTEX).unwrap_or(0);
                self.near_included(tri.neighbor(inf, slot), q)
            }
        }
    }
}

impl Membership for AlphaShape {
    fn dim(&self) -> usize {
        self.complex.dim()
    }

    fn contains(&self, p: &[f64]) -> Result<bool, GeometryError> {
        if p.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let (lo, hi) = self.complex.triangulation().bounding_box();
        let tol = 1e-9 * self.complex.triangulation().extent();
        if !super::in_box(p, &lo, &hi, tol) {
            return Ok(false);
        }
        Ok(self.contains_checked(p))
    }
}

/// Outcome of the optimal-radius search.
#[derive(Debug, Clone)]
pub struct AlphaSearch {
    pub alpha_star: f64,
    pub shape: AlphaShape,
    /// Every probed radius with its feasibility, in probe order.
    pub probes: Vec<(f64, bool)>,
}

impl AlphaSearch {
    /// No infeasible probe lies above a feasible one.
    pub fn is_monotone(&self) -> bool {
        let min_feasible = self.probes.iter().filter(|p| p.1).map(|p| p.0).fold(f64::INFINITY, f64::min);
        self.probes.iter().all(|&(a, f)| f || a < min_feasible)
    }
}

/// Log-space bisection for the smallest radius at which the alpha complex
/// of `points` is a single polytope covering every point.
pub fn search_optimal_alpha(
    points: &[Vec<f64>],
    lo: f64,
    hi: f64,
    threshold: f64,
    max_dim: usize,
) -> Result<AlphaSearch, GeometryError> {
    validate_bounds(lo, hi, threshold)?;
    let complex = Arc::new(delaunay(points, max_dim)?);
    search_optimal_alpha_in(complex, lo, hi, threshold)
}

/// [`search_optimal_alpha`] on a prebuilt complex.
pub fn search_optimal_alpha_in(
    complex: Arc<SimplicialComplex>,
    mut lo: f64,
    mut hi: f64,
    threshold: f64,
) -> Result<AlphaSearch, GeometryError> {
    validate_bounds(lo, hi, threshold)?;
    let mut probes = Vec::new();
    let mut best = alpha_complex(complex.clone(), hi);
    probes.push((hi, best.is_single_polytope()));
    if !best.is_single_polytope() {
        return Err(GeometryError::InfeasibleAtHi { hi });
    }
    while hi - lo > threshold {
        let mid = libm::sqrt(lo * hi);
        let shape = alpha_complex(complex.clone(), mid);
        let ok = shape.is_single_polytope();
        probes.push((mid, ok));
        if ok {
            hi = mid;
            best = shape;
        } else {
            lo = mid;
        }
    }
    Ok(AlphaSearch { alpha_star: hi, shape: best, probes })
}

fn validate_bounds(lo: f64, hi: f64, threshold: f64) -> Result<(), GeometryError> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(GeometryError::InvalidArgument("alpha bounds must satisfy 0 < lo < hi"));
    }
    if !(threshold > 0.0) {
        return Err(GeometryError::InvalidArgument("alpha threshold must be positive"));
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
