use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::delaunay::Triangulation;
use super::simplex::{min_enclosing_ball, simplex_volume};
use super::GeometryError;

/// Delaunay complex with a filtration radius on every simplex.
///
/// Top-dimensional simplices are stored explicitly with their radius and
/// volume; lower-dimensional faces are enumerated on demand. The filtration
/// radius of a simplex is the radius of its minimum enclosing ball, i.e.
/// the circumradius when the circumcentre lies in the simplex and the
/// smaller covering facet ball otherwise, so faces never exceed cofaces.
#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    tri: Triangulation,
    radii: Vec<f64>,
    volumes: Vec<f64>,
    position: Vec<u32>,
}

/// Delaunay triangulation of `points` with filtration radii.
pub fn delaunay(points: &[Vec<f64>], max_dim: usize) -> Result<SimplicialComplex, GeometryError> {
    let dim = points.first().map_or(0, |p| p.len());
    SimplicialComplex::new(Triangulation::new(points, dim, max_dim)?)
}

impl SimplicialComplex {
    pub fn new(tri: Triangulation) -> Result<Self, GeometryError> {
        let finite = tri.finite_cells();
        let mut position = vec![u32::MAX; tri.num_cells()];
        for (i, &c) in finite.iter().enumerate() {
            position[c as usize] = i as u32;
        }
        let radii = finite
            .iter()
            .map(|&c| min_enclosing_ball(&tri.cell_points(c)).radius())
            .collect();
        let volumes = finite.iter().map(|&c| simplex_volume(&tri.cell_points(c))).collect();
        Ok(Self { tri, radii, volumes, position })
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    pub fn dim(&self) -> usize {
        self.tri.dim()
    }

    pub fn num_points(&self) -> usize {
        self.tri.num_vertices()
    }

    pub fn point(&self, v: u32) -> &[f64] {
        self.tri.vertex(v)
    }

    /// Number of top-dimensional simplices.
    pub fn num_top(&self) -> usize {
        self.radii.len()
    }

    /// Vertex indices of the `i`-th top simplex.
    pub fn top(&self, i: usize) -> &[u32] {
        self.tri.cell(self.tri.finite_cells()[i])
    }

    pub fn top_radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    pub fn top_volume(&self, i: usize) -> f64 {
        self.volumes[i]
    }

    /// Position of triangulation cell `c` among the top simplices.
    pub(crate) fn position(&self, c: u32) -> Option<usize> {
        match self.position.get(c as usize) {
            Some(&p) if p != u32::MAX => Some(p as usize),
            _ => None,
        }
    }

    /// Top-simplex positions adjacent to top simplex `i` across a facet.
    pub(crate) fn top_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.tri.finite_cells()[i];
        (0..=self.dim()).filter_map(move |s| self.position(self.tri.neighbor(c, s)))
    }

    /// Largest filtration radius over top simplices.
    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }

    /// Unique `k`-faces of the complex with their filtration radii, sorted by
    /// vertex tuple. `k = dim` returns the top simplices.
    pub fn faces(&self, k: usize) -> Vec<(Vec<u32>, f64)> {
        let d = self.dim();
        if k > d {
            return Vec::new();
        }
        if k == 0 {
            return (0..self.num_points() as u32).map(|v| (vec![v], 0.0)).collect();
        }
        let mut out: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for i in 0..self.num_top() {
            let verts = self.top(i);
            for mask in 0u32..(1 << (d + 1)) {
                if mask.count_ones() as usize != k + 1 {
                    continue;
                }
                let mut face: Vec<u32> = (0..=d).filter(|b| mask & (1 << b) != 0).map(|b| verts[b]).collect();
                face.sort_unstable();
                if out.contains_key(&face) {
                    continue;
                }
                let pts: Vec<&[f64]> = face.iter().map(|&v| self.point(v)).collect();
                let r = if k == d { self.radii[i] } else { min_enclosing_ball(&pts).radius() };
                out.insert(face, r);
            }
        }
        out.into_iter().collect()
    }

    /// Total volume of all top simplices (the convex hull volume).
    pub fn hull_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }
}
