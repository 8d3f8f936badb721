//! Incremental Delaunay triangulation in arbitrary (small) dimension.
//!
//! Points are lifted onto the paraboloid `x_{d+1} = |x|^2`; the Delaunay
//! triangulation is the projection of the lower convex hull of the lifted
//! set. The hull is grown one point at a time: the cells whose lifted facet
//! is visible from the new lifted point (equivalently, whose circumsphere
//! strictly contains the new point) form a star-shaped cavity which is
//! re-coned from the new point. The outside of the hull is closed off with a
//! symbolic vertex at infinity so hull growth uses the same cavity step.
//!
//! All predicates run on coordinates snapped to a `2^40` grid over the
//! bounding box and are evaluated exactly (see [`super::predicates`]), which
//! keeps the topology consistent under co-spherical and co-planar input.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::predicates::{insphere_convention, lifted_det, orient, MAX_ORDER};
use super::GeometryError;

/// Symbolic vertex at infinity.
pub const INFINITE_VERTEX: u32 = u32::MAX;
const GRID_SPAN: f64 = (1u64 << 40) as f64;
/// Relative tolerance used to declare a point set affinely degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Result of locating a query point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// The point lies in the closed finite cell.
    Inside(u32),
    /// The point lies strictly outside the convex hull; the returned cell is
    /// an infinite cell whose hull facet is visible from the point.
    Outside(u32),
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    dim: usize,
    coords: Vec<f64>,
    grid: Vec<i64>,
    cells: Vec<u32>,
    adj: Vec<u32>,
    input_vertex: Vec<u32>,
    vertex_cell: Vec<u32>,
    finite: Vec<u32>,
    convention: Ordering,
    origin: Vec<f64>,
    scale: f64,
    extent: f64,
    hint: HintGrid,
}

#[derive(Debug, Clone, Default)]
struct HintGrid {
    res: usize,
    cells: Vec<u32>,
}

struct Builder<'a> {
    d: usize,
    grid: &'a [i64],
    cells: Vec<u32>,
    adj: Vec<u32>,
    alive: Vec<bool>,
    free: Vec<u32>,
    mark: Vec<u32>,
    generation: u32,
    convention: Ordering,
    last: u32,
    walk_counter: usize,
}

const IN_CONFLICT: u32 = 1;
const NOT_CONFLICT: u32 = 2;

impl<'a> Builder<'a> {
    fn width(&self) -> usize {
        self.d + 1
    }

    fn vertex(&self, v: u32) -> &'a [i64] {
        let d = self.d;
        &self.grid[v as usize * d..(v as usize + 1) * d]
    }

    fn cell(&self, c: u32) -> &[u32] {
        let w = self.width();
        &self.cells[c as usize * w..(c as usize + 1) * w]
    }

    fn is_infinite(&self, c: u32) -> bool {
        self.cell(c).contains(&INFINITE_VERTEX)
    }

    fn alloc(&mut self, verts: &[u32]) -> u32 {
        let w = self.width();
        if let Some(c) = self.free.pop() {
            self.cells[c as usize * w..(c as usize + 1) * w].copy_from_slice(verts);
            for s in 0..w {
                self.adj[c as usize * w + s] = u32::MAX;
            }
            self.alive[c as usize] = true;
            c
        } else {
            let c = self.alive.len() as u32;
            self.cells.extend_from_slice(verts);
            self.adj.extend(core::iter::repeat(u32::MAX).take(w));
            self.alive.push(true);
            self.mark.push(0);
            c
        }
    }

    /// Orientation of cell `c` with slot `slot` replaced by the query point.
    fn orient_replaced(&self, c: u32, slot: usize, q: &[i64]) -> Ordering {
        let mut pts: [&[i64]; MAX_ORDER] = [&[]; MAX_ORDER];
        for (i, &v) in self.cell(c).iter().enumerate() {
            pts[i] = if i == slot { q } else { self.vertex(v) };
        }
        orient(&pts[..self.d + 1], self.d)
    }

    fn insphere(&self, c: u32, q: &[i64]) -> bool {
        let mut pts: [&[i64]; MAX_ORDER] = [&[]; MAX_ORDER];
        for (i, &v) in self.cell(c).iter().enumerate() {
            pts[i] = self.vertex(v);
        }
        let s = lifted_det(&pts[..self.d + 1], q, self.d);
        s != Ordering::Equal && s == self.convention
    }

    fn in_conflict(&self, c: u32, q: &[i64]) -> bool {
        let verts = self.cell(c);
        if let Some(k) = verts.iter().position(|&v| v == INFINITE_VERTEX) {
            match self.orient_replaced(c, k, q) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    let t = self.adj[c as usize * self.width() + k];
                    self.insphere(t, q)
                }
            }
        } else {
            self.insphere(c, q)
        }
    }

    fn link_all(&mut self, ids: &[u32]) {
        let w = self.width();
        let mut ridges: Vec<([u32; MAX_ORDER], u32, usize)> = Vec::with_capacity(ids.len() * w);
        for &c in ids {
            for s in 0..w {
                if self.adj[c as usize * w + s] != u32::MAX {
                    continue;
                }
                let mut key = [u32::MAX; MAX_ORDER];
                let mut n = 0;
                for (i, &v) in self.cell(c).iter().enumerate() {
                    if i != s {
                        key[n] = v;
                        n += 1;
                    }
                }
                key[..n].sort_unstable();
                ridges.push((key, c, s));
            }
        }
        ridges.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut i = 0;
        while i < ridges.len() {
            if i + 1 < ridges.len() && ridges[i].0 == ridges[i + 1].0 {
                let (_, c, s) = ridges[i];
                let (_, o, os) = ridges[i + 1];
                self.adj[c as usize * w + s] = o;
                self.adj[o as usize * w + os] = c;
                i += 2;
            } else {
                debug_assert!(false, "unmatched ridge in cavity");
                i += 1;
            }
        }
    }

    /// Finds a cell in conflict with `q` by a visibility walk.
    fn locate_conflict(&mut self, q: &[i64]) -> u32 {
        let w = self.width();
        let mut c = self.last;
        if !self.alive[c as usize] || self.is_infinite(c) {
            c = (0..self.alive.len() as u32)
                .find(|&i| self.alive[i as usize] && !self.is_infinite(i))
                .expect("triangulation has a finite cell");
        }
        let limit = 4 * self.alive.len() + 64;
        for _ in 0..limit {
            self.walk_counter = self.walk_counter.wrapping_add(1);
            let off = self.walk_counter % w;
            let mut next = None;
            for t in 0..w {
                let j = (off + t) % w;
                if self.orient_replaced(c, j, q) == Ordering::Less {
                    next = Some(self.adj[c as usize * w + j]);
                    break;
                }
            }
            match next {
                None => return c,
                Some(nb) if self.is_infinite(nb) => return nb,
                Some(nb) => c = nb,
            }
        }
        // Walk did not settle; fall back to an exhaustive scan.
        (0..self.alive.len() as u32)
            .find(|&i| self.alive[i as usize] && self.in_conflict(i, q))
            .expect("some cell conflicts with a new point")
    }

    fn insert(&mut self, v: u32) {
        let q = self.vertex(v);
        let w = self.width();
        let seed = self.locate_conflict(q);
        self.generation = self.generation.wrapping_add(2);
        if self.generation < 3 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.generation = 3;
        }
        let g = self.generation;
        let mut conflict = vec![seed];
        self.mark[seed as usize] = g + IN_CONFLICT - 1;
        let mut boundary: Vec<(u32, usize)> = Vec::new();
        let mut head = 0;
        while head < conflict.len() {
            let c = conflict[head];
            head += 1;
            for s in 0..w {
                let nb = self.adj[c as usize * w + s];
                let m = self.mark[nb as usize];
                if m == g + IN_CONFLICT - 1 {
                    continue;
                }
                if m == g + NOT_CONFLICT - 1 {
                    boundary.push((c, s));
                    continue;
                }
                if self.in_conflict(nb, q) {
                    self.mark[nb as usize] = g + IN_CONFLICT - 1;
                    conflict.push(nb);
                } else {
                    self.mark[nb as usize] = g + NOT_CONFLICT - 1;
                    boundary.push((c, s));
                }
            }
        }
        let mut created = Vec::with_capacity(boundary.len());
        for &(c, s) in &boundary {
            let mut verts: Vec<u32> = self.cell(c).to_vec();
            verts[s] = v;
            let nb = self.adj[c as usize * w + s];
            let n = self.alloc(&verts);
            self.adj[n as usize * w + s] = nb;
            let back = (0..w)
                .find(|&m| self.adj[nb as usize * w + m] == c)
                .expect("neighbour links back");
            self.adj[nb as usize * w + back] = n;
            created.push(n);
        }
        self.link_all(&created);
        for &c in &conflict {
            self.alive[c as usize] = false;
            self.mark[c as usize] = 0;
            self.free.push(c);
        }
        if let Some(&f) = created.iter().find(|&&c| !self.is_infinite(c)) {
            self.last = f;
        }
    }
}

impl Triangulation {
    /// Builds the Delaunay triangulation of `points` (each of length `dim`).
    ///
    /// Duplicate points (after snapping) are merged into one vertex;
    /// [`Triangulation::input_vertex`] maps every input index to its vertex.
    pub fn new(points: &[Vec<f64>], dim: usize, max_dim: usize) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::DegenerateInput);
        }
        let cap = max_dim.min(MAX_ORDER - 1);
        if dim > cap {
            return Err(GeometryError::DimensionTooHigh { dim, max: cap });
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(GeometryError::DimensionMismatch { expected: dim, got: p.len() });
        }
        if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(GeometryError::NonFinite);
        }
        if points.len() < dim + 1 {
            return Err(GeometryError::DegenerateInput);
        }
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in points {
            for c in 0..dim {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        let extent = (0..dim).map(|c| hi[c] - lo[c]).fold(0.0, f64::max);
        if extent <= 0.0 {
            return Err(GeometryError::DegenerateInput);
        }
        let scale = GRID_SPAN / extent;

        // Snap and deduplicate.
        let mut index: BTreeMap<Vec<i64>, u32> = BTreeMap::new();
        let mut coords = Vec::new();
        let mut grid = Vec::new();
        let mut input_vertex = Vec::with_capacity(points.len());
        for p in points {
            let g: Vec<i64> = (0..dim).map(|c| libm::round((p[c] - lo[c]) * scale) as i64).collect();
            let next = (grid.len() / dim) as u32;
            let id = *index.entry(g.clone()).or_insert_with(|| {
                grid.extend_from_slice(&g);
                coords.extend_from_slice(p);
                next
            });
            input_vertex.push(id);
        }
        let nv = grid.len() / dim;
        let initial = initial_simplex(&coords, nv, dim, extent)?;

        let convention = insphere_convention(dim);
        let mut b = Builder {
            d: dim,
            grid: &grid,
            cells: Vec::new(),
            adj: Vec::new(),
            alive: Vec::new(),
            free: Vec::new(),
            mark: Vec::new(),
            generation: 1,
            convention,
            last: 0,
            walk_counter: 0,
        };
        let mut first: Vec<u32> = initial.clone();
        {
            let pts: Vec<&[i64]> = first.iter().map(|&v| b.vertex(v)).collect();
            match orient(&pts, dim) {
                Ordering::Equal => return Err(GeometryError::DegenerateInput),
                Ordering::Less => first.swap(0, 1),
                Ordering::Greater => {}
            }
        }
        let w = dim + 1;
        let mut ids = vec![b.alloc(&first)];
        for i in 0..w {
            let mut verts = first.clone();
            verts[i] = INFINITE_VERTEX;
            verts.swap(i, (i + 1) % w);
            ids.push(b.alloc(&verts));
        }
        b.link_all(&ids);
        b.last = ids[0];

        let mut is_initial = vec![false; nv];
        for &v in &initial {
            is_initial[v as usize] = true;
        }
        for v in insertion_order(&grid, dim) {
            if !is_initial[v as usize] {
                b.insert(v);
            }
        }

        // Compact alive cells.
        let mut remap = vec![u32::MAX; b.alive.len()];
        let mut count = 0u32;
        for (c, &a) in b.alive.iter().enumerate() {
            if a {
                remap[c] = count;
                count += 1;
            }
        }
        let mut cells = Vec::with_capacity(count as usize * w);
        let mut adj = Vec::with_capacity(count as usize * w);
        for (c, &a) in b.alive.iter().enumerate() {
            if a {
                cells.extend_from_slice(&b.cells[c * w..(c + 1) * w]);
                adj.extend(b.adj[c * w..(c + 1) * w].iter().map(|&n| remap[n as usize]));
            }
        }
        let mut vertex_cell = vec![u32::MAX; nv];
        let mut finite = Vec::new();
        for c in 0..count as usize {
            let vs = &cells[c * w..(c + 1) * w];
            if vs.contains(&INFINITE_VERTEX) {
                continue;
            }
            finite.push(c as u32);
            for &v in vs {
                vertex_cell[v as usize] = c as u32;
            }
        }
        let mut tri = Triangulation {
            dim,
            coords,
            grid,
            cells,
            adj,
            input_vertex,
            vertex_cell,
            finite,
            convention,
            origin: lo,
            scale,
            extent,
            hint: HintGrid::default(),
        };
        tri.build_hint_grid();
        Ok(tri)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn vertex(&self, v: u32) -> &[f64] {
        &self.coords[v as usize * self.dim..(v as usize + 1) * self.dim]
    }

    /// Vertex that input point `i` was merged into.
    pub fn input_vertex(&self, i: usize) -> u32 {
        self.input_vertex[i]
    }

    pub fn num_inputs(&self) -> usize {
        self.input_vertex.len()
    }

    /// Finite (top-dimensional) cells.
    pub fn finite_cells(&self) -> &[u32] {
        &self.finite
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn cell(&self, c: u32) -> &[u32] {
        let w = self.dim + 1;
        &self.cells[c as usize * w..(c as usize + 1) * w]
    }

    pub fn neighbor(&self, c: u32, slot: usize) -> u32 {
        self.adj[c as usize * (self.dim + 1) + slot]
    }

    pub fn is_infinite(&self, c: u32) -> bool {
        self.cell(c).contains(&INFINITE_VERTEX)
    }

    pub fn cell_points(&self, c: u32) -> Vec<&[f64]> {
        self.cell(c).iter().map(|&v| self.vertex(v)).collect()
    }

    /// Largest bounding-box side of the input.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = self.origin.iter().map(|o| o + self.extent).collect();
        (self.origin.clone(), hi)
    }

    /// Snaps a query to the triangulation grid. `None` when the query is too
    /// far outside the bounding box to be represented.
    pub fn snap(&self, q: &[f64]) -> Option<Vec<i64>> {
        let limit = (1i64 << 61) as f64;
        let mut out = Vec::with_capacity(self.dim);
        for c in 0..self.dim {
            let v = libm::round((q[c] - self.origin[c]) * self.scale);
            if !v.is_finite() || libm::fabs(v) > limit {
                return None;
            }
            out.push(v as i64);
        }
        Some(out)
    }

    fn grid_vertex(&self, v: u32) -> &[i64] {
        &self.grid[v as usize * self.dim..(v as usize + 1) * self.dim]
    }

    /// Snapped coordinates of vertex `v`.
    pub fn snapped_vertex(&self, v: u32) -> &[i64] {
        self.grid_vertex(v)
    }

    /// Exact orientation of finite cell `c` with `slot` replaced by `q`.
    pub fn orient_replaced(&self, c: u32, slot: usize, q: &[i64]) -> Ordering {
        let mut pts: [&[i64]; MAX_ORDER] = [&[]; MAX_ORDER];
        for (i, &v) in self.cell(c).iter().enumerate() {
            pts[i] = if i == slot { q } else { self.grid_vertex(v) };
        }
        orient(&pts[..self.dim + 1], self.dim)
    }

    /// Exact strict in-circumsphere test for a finite cell.
    pub fn in_circumsphere(&self, c: u32, q: &[i64]) -> bool {
        let mut pts: [&[i64]; MAX_ORDER] = [&[]; MAX_ORDER];
        for (i, &v) in self.cell(c).iter().enumerate() {
            pts[i] = self.grid_vertex(v);
        }
        let s = lifted_det(&pts[..self.dim + 1], q, self.dim);
        s != Ordering::Equal && s == self.convention
    }

    fn build_hint_grid(&mut self) {
        let d = self.dim;
        let mut res = 1usize;
        while (res + 1).pow(d as u32) <= 4096 && res < 64 {
            res += 1;
        }
        let total = res.pow(d as u32);
        let mut cells = vec![u32::MAX; total];
        for v in 0..self.num_vertices() as u32 {
            let c = self.vertex_cell[v as usize];
            if c == u32::MAX {
                continue;
            }
            let b = self.bucket(self.vertex(v), res);
            if cells[b] == u32::MAX {
                cells[b] = c;
            }
        }
        // Multi-source flood fill so every bucket has a nearby start cell.
        let mut queue: VecDeque<usize> = (0..total).filter(|&b| cells[b] != u32::MAX).collect();
        while let Some(b) = queue.pop_front() {
            let mut rem = b;
            let mut stride = 1;
            for _ in 0..d {
                let coord = rem % res;
                rem /= res;
                if coord > 0 && cells[b - stride] == u32::MAX {
                    cells[b - stride] = cells[b];
                    queue.push_back(b - stride);
                }
                if coord + 1 < res && cells[b + stride] == u32::MAX {
                    cells[b + stride] = cells[b];
                    queue.push_back(b + stride);
                }
                stride *= res;
            }
        }
        self.hint = HintGrid { res, cells };
    }

    fn bucket(&self, p: &[f64], res: usize) -> usize {
        let mut b = 0;
        let mut stride = 1;
        for c in 0..self.dim {
            let t = (p[c] - self.origin[c]) / self.extent;
            let i = if t.is_finite() { (t * res as f64).clamp(0.0, (res - 1) as f64) as usize } else { 0 };
            b += i * stride;
            stride *= res;
        }
        b
    }

    /// Locates a (snapped) query point with a visibility walk.
    pub fn locate_snapped(&self, q: &[i64], start: u32) -> Location {
        let w = self.dim + 1;
        let mut c = start;
        let limit = 4 * self.num_cells() + 64;
        let mut counter = 0usize;
        for _ in 0..limit {
            counter += 1;
            let off = counter % w;
            let mut next = None;
            for t in 0..w {
                let j = (off + t) % w;
                if self.orient_replaced(c, j, q) == Ordering::Less {
                    next = Some(self.neighbor(c, j));
                    break;
                }
            }
            match next {
                None => return Location::Inside(c),
                Some(nb) if self.is_infinite(nb) => return Location::Outside(nb),
                Some(nb) => c = nb,
            }
        }
        // Exhaustive fallback.
        for &f in &self.finite {
            if (0..w).all(|j| self.orient_replaced(f, j, q) != Ordering::Less) {
                return Location::Inside(f);
            }
        }
        let outside = (0..self.num_cells() as u32)
            .find(|&c| self.is_infinite(c))
            .expect("infinite cells exist");
        Location::Outside(outside)
    }

    /// Locates `q` (in input coordinates). `None` if the query cannot be
    /// snapped (far outside the bounding box).
    pub fn locate(&self, q: &[f64]) -> Option<(Vec<i64>, Location)> {
        let g = self.snap(q)?;
        let start = match self.hint.cells.get(self.bucket(q, self.hint.res.max(1))) {
            Some(&c) if c != u32::MAX => c,
            _ => self.finite[0],
        };
        let loc = self.locate_snapped(&g, start);
        Some((g, loc))
    }

    /// All finite cells whose closure contains the snapped point, given a
    /// finite cell that contains it.
    pub fn closed_star(&self, q: &[i64], start: u32) -> Vec<u32> {
        let w = self.dim + 1;
        let mut out = vec![start];
        let mut head = 0;
        while head < out.len() {
            let c = out[head];
            head += 1;
            for j in 0..w {
                if self.orient_replaced(c, j, q) == Ordering::Equal {
                    let nb = self.neighbor(c, j);
                    if !self.is_infinite(nb) && !out.contains(&nb) {
                        out.push(nb);
                    }
                }
            }
        }
        out
    }

    /// Checks the empty-circumsphere property of every finite cell against
    /// every vertex with the exact predicate. Quadratic; for tests.
    pub fn verify_delaunay(&self) -> bool {
        for &c in &self.finite {
            for v in 0..self.num_vertices() as u32 {
                if self.cell(c).contains(&v) {
                    continue;
                }
                if self.in_circumsphere(c, self.grid_vertex(v)) {
                    return false;
                }
            }
        }
        true
    }
}

/// Greedy farthest-point choice of `dim + 1` affinely independent vertices.
fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Z-order key from the leading bits of every grid coordinate.
fn morton(g: &[i64]) -> u64 {
    let bits = (63 / g.len()).min(40) as u32;
    let mut key = 0u64;
    for b in (0..bits).rev() {
        for &c in g {
            key = (key << 1) | ((c as u64 >> (40 - bits + b)) & 1);
        }
    }
    key
}

/// Biased randomized insertion order: a deterministic shuffle split into
/// rounds of doubling size, each round sorted along a Z-order curve.
fn insertion_order(grid: &[i64], dim: usize) -> Vec<u32> {
    let n = grid.len() / dim;
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| splitmix(v as u64));
    let mut end = n;
    while end > 0 {
        let start = if end <= 64 { 0 } else { end / 2 };
        order[start..end].sort_by_key(|&v| morton(&grid[v as usize * dim..(v as usize + 1) * dim]));
        end = start;
    }
    order
}

fn initial_simplex(coords: &[f64], nv: usize, dim: usize, extent: f64) -> Result<Vec<u32>, GeometryError> {
    let at = |v: usize| &coords[v * dim..(v + 1) * dim];
    let mut chosen = vec![0u32];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let origin = at(0).to_vec();
    for _ in 0..dim {
        let mut best = (0usize, -1.0f64);
        for v in 0..nv {
            let mut r: Vec<f64> = (0..dim).map(|c| at(v)[c] - origin[c]).collect();
            for b in &basis {
                let dot: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for c in 0..dim {
                    r[c] -= dot * b[c];
                }
            }
            let norm = libm::sqrt(r.iter().map(|x| x * x).sum::<f64>());
            if norm > best.1 {
                best = (v, norm);
            }
        }
        if best.1 <= DEGENERACY_TOL * extent {
            return Err(GeometryError::DegenerateInput);
        }
        let v = best.0;
        let mut r: Vec<f64> = (0..dim).map(|c| at(v)[c] - origin[c]).collect();
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for c in 0..dim {
                    r[c] -= dot * b[c];
                }
            }
        }
        let norm = libm::sqrt(r.iter().map(|x| x * x).sum::<f64>());
        basis.push(r.iter().map(|x| x / norm).collect());
        chosen.push(v as u32);
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]
    }

    #[test]
    fn unit_square_two_triangles() {
        let t = Triangulation::new(&square(), 2, 6).unwrap();
        assert_eq!(t.finite_cells().len(), 2);
        assert!(t.verify_delaunay());
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert_eq!(Triangulation::new(&pts, 2, 6).unwrap_err(), GeometryError::DegenerateInput);
    }

    #[test]
    fn too_high_dimension() {
        let pts = vec![vec![0.0; 8]; 9];
        assert!(matches!(
            Triangulation::new(&pts, 8, 6),
            Err(GeometryError::DimensionTooHigh { .. })
        ));
    }

    #[test]
    fn random_clouds_are_delaunay() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=4 {
            let n = 40;
            let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
            let t = Triangulation::new(&pts, d, 6).unwrap();
            assert!(t.verify_delaunay(), "dimension {d}");
            for &c in t.finite_cells() {
                let pts: Vec<&[i64]> = t.cell(c).iter().map(|&v| t.snapped_vertex(v)).collect();
                assert_eq!(orient(&pts, d), Ordering::Greater);
            }
        }
    }

    #[test]
    fn integer_lattice_is_consistent() {
        // Heavily co-spherical and co-planar input.
        let mut pts = Vec::new();
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..3 {
                    pts.push(vec![x as f64, y as f64, z as f64]);
                }
            }
        }
        let t = Triangulation::new(&pts, 3, 6).unwrap();
        assert!(t.verify_delaunay());
        let vol: f64 = t
            .finite_cells()
            .iter()
            .map(|&c| crate::geometry::simplex::simplex_volume(&t.cell_points(c)))
            .sum();
        assert!((vol - 18.0).abs() < 1e-9);
    }

    #[test]
    fn duplicates_merge() {
        let mut pts = square();
        pts.push(vec![1.0, 1.0]);
        let t = Triangulation::new(&pts, 2, 6).unwrap();
        assert_eq!(t.num_vertices(), 4);
        assert_eq!(t.input_vertex(4), t.input_vertex(2));
    }

    #[test]
    fn locate_inside_and_outside() {
        let t = Triangulation::new(&square(), 2, 6).unwrap();
        let (_, loc) = t.locate(&[0.25, 0.5]).unwrap();
        assert!(matches!(loc, Location::Inside(_)));
        let (_, loc) = t.locate(&[1.5, 0.5]).unwrap();
        assert!(matches!(loc, Location::Outside(_)));
    }
}
