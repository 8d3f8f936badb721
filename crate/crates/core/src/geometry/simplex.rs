//! Floating point simplex measures: volume, barycentric coordinates,
//! circumballs and minimum enclosing balls.

use alloc::vec;
use alloc::vec::Vec;

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `false` when the system is numerically singular.
pub(crate) fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    if scale == 0.0 {
        return n == 0;
    }
    let eps = scale * 1e-13;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if libm::fabs(a[r * n + col]) > libm::fabs(a[piv * n + col]) {
                piv = r;
            }
        }
        if libm::fabs(a[piv * n + col]) <= eps {
            return false;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut v = b[col];
        for c in col + 1..n {
            v -= a[col * n + c] * b[c];
        }
        b[col] = v / a[col * n + col];
    }
    true
}

/// Determinant of a square row-major matrix (destroys the input).
pub(crate) fn determinant(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if libm::fabs(a[r * n + col]) > libm::fabs(a[piv * n + col]) {
                piv = r;
            }
        }
        let p = a[piv * n + col];
        if p == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
    }
    det
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Unsigned `d`-volume of a full-dimensional simplex given by `d + 1`
/// vertices in `R^d`.
pub fn simplex_volume(vertices: &[&[f64]]) -> f64 {
    let d = vertices.len() - 1;
    if d == 0 {
        return 0.0;
    }
    let p0 = vertices[0];
    let mut m = Vec::with_capacity(d * d);
    for v in &vertices[1..] {
        for c in 0..d {
            m.push(v[c] - p0[c]);
        }
    }
    libm::fabs(determinant(&mut m, d)) / factorial(d)
}

/// Barycentric coordinates of `q` with respect to a full-dimensional
/// simplex in `R^d`. `None` for a degenerate simplex.
pub fn barycentric(vertices: &[&[f64]], q: &[f64]) -> Option<Vec<f64>> {
    let d = vertices.len() - 1;
    let p0 = vertices[0];
    // Columns are p_i - p0.
    let mut m = vec![0.0; d * d];
    for (i, v) in vertices[1..].iter().enumerate() {
        for r in 0..d {
            m[r * d + i] = v[r] - p0[r];
        }
    }
    let mut rhs: Vec<f64> = (0..d).map(|r| q[r] - p0[r]).collect();
    if !solve_in_place(&mut m, &mut rhs, d) {
        return None;
    }
    let mut out = Vec::with_capacity(d + 1);
    out.push(1.0 - rhs.iter().sum::<f64>());
    out.extend_from_slice(&rhs);
    Some(out)
}

/// Ball through all given points, centred in their affine hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius_sq: f64,
}

impl Ball {
    pub fn radius(&self) -> f64 {
        libm::sqrt(self.radius_sq)
    }

    pub fn contains(&self, p: &[f64], rel_tol: f64) -> bool {
        dist_sq(&self.center, p) <= self.radius_sq * (1.0 + rel_tol) + 1e-300
    }
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Circumball of affinely independent points together with the barycentric
/// coordinates of its centre. `None` if the points are affinely dependent.
pub fn circumball(points: &[&[f64]]) -> Option<(Ball, Vec<f64>)> {
    let n = points[0].len();
    let m = points.len() - 1;
    if m == 0 {
        return Some((
            Ball { center: points[0].to_vec(), radius_sq: 0.0 },
            vec![1.0],
        ));
    }
    let p0 = points[0];
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| (0..n).map(|c| p[c] - p0[c]).collect())
        .collect();
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            gram[i * m + j] = diffs[i].iter().zip(&diffs[j]).map(|(a, b)| a * b).sum();
        }
        rhs[i] = 0.5 * gram[i * m + i];
    }
    if !solve_in_place(&mut gram, &mut rhs, m) {
        return None;
    }
    let mut center = p0.to_vec();
    for (i, mu) in rhs.iter().enumerate() {
        for c in 0..n {
            center[c] += mu * diffs[i][c];
        }
    }
    let mut bary = Vec::with_capacity(m + 1);
    bary.push(1.0 - rhs.iter().sum::<f64>());
    bary.extend_from_slice(&rhs);
    let radius_sq = dist_sq(&center, p0);
    Some((Ball { center, radius_sq }, bary))
}

/// Minimum enclosing ball of a simplex's vertices.
///
/// The ball is the circumball of the simplex when its circumcentre lies in
/// the closed simplex; otherwise it is the smallest minimum enclosing ball
/// of a facet that still covers the dropped vertex. Memoised over vertex
/// subsets, so the cost is `O(2^(k+1))` small solves for a `k`-simplex.
pub fn min_enclosing_ball(points: &[&[f64]]) -> Ball {
    let k = points.len();
    assert!((1..=16).contains(&k), "simplex too large for subset recursion");
    let mut memo: Vec<Option<Ball>> = vec![None; 1 << k];
    meb_rec(points, (1u32 << k) - 1, &mut memo)
}

fn meb_rec(points: &[&[f64]], mask: u32, memo: &mut [Option<Ball>]) -> Ball {
    if let Some(b) = &memo[mask as usize] {
        return b.clone();
    }
    let members: Vec<usize> = (0..points.len()).filter(|i| mask & (1 << i) != 0).collect();
    let subset: Vec<&[f64]> = members.iter().map(|&i| points[i]).collect();
    let circ = circumball(&subset);
    let result = match &circ {
        Some((ball, bary)) if members.len() == 1 || bary.iter().all(|&l| l >= -1e-12) => {
            ball.clone()
        }
        _ => {
            let mut best: Option<Ball> = None;
            for &drop in &members {
                let sub = mask & !(1 << drop);
                let b = meb_rec(points, sub, memo);
                if b.contains(points[drop], 1e-9)
                    && best.as_ref().map_or(true, |cur| b.radius_sq < cur.radius_sq)
                {
                    best = Some(b);
                }
            }
            match (best, circ) {
                (Some(b), _) => b,
                (None, Some((ball, _))) => ball,
                // Affinely dependent subset with no covering facet ball:
                // fall back to the bounding ball around the centroid.
                (None, None) => centroid_ball(&subset),
            }
        }
    };
    memo[mask as usize] = Some(result.clone());
    result
}

fn centroid_ball(points: &[&[f64]]) -> Ball {
    let n = points[0].len();
    let mut c = vec![0.0; n];
    for p in points {
        for i in 0..n {
            c[i] += p[i] / points.len() as f64;
        }
    }
    let r = points.iter().map(|p| dist_sq(&c, p)).fold(0.0, f64::max);
    Ball { center: c, radius_sq: r }
}

/// Euclidean distance from `q` to the closed simplex spanned by `points`
/// (any dimension up to the ambient one).
pub fn distance_to_simplex(points: &[&[f64]], q: &[f64]) -> f64 {
    let k = points.len();
    assert!((1..=16).contains(&k));
    libm::sqrt(dist_rec(points, q, (1u32 << k) - 1))
}

fn dist_rec(points: &[&[f64]], q: &[f64], mask: u32) -> f64 {
    let members: Vec<usize> = (0..points.len()).filter(|i| mask & (1 << i) != 0).collect();
    if members.len() == 1 {
        return dist_sq(points[members[0]], q);
    }
    let n = q.len();
    let p0 = points[members[0]];
    let m = members.len() - 1;
    let diffs: Vec<Vec<f64>> = members[1..]
        .iter()
        .map(|&i| (0..n).map(|c| points[i][c] - p0[c]).collect())
        .collect();
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            gram[i * m + j] = diffs[i].iter().zip(&diffs[j]).map(|(a, b)| a * b).sum();
        }
        rhs[i] = diffs[i].iter().enumerate().map(|(c, a)| a * (q[c] - p0[c])).sum();
    }
    if solve_in_place(&mut gram, &mut rhs, m) {
        let l0 = 1.0 - rhs.iter().sum::<f64>();
        if l0 >= 0.0 && rhs.iter().all(|&l| l >= 0.0) {
            let mut proj = p0.to_vec();
            for (i, mu) in rhs.iter().enumerate() {
                for c in 0..n {
                    proj[c] += mu * diffs[i][c];
                }
            }
            return dist_sq(&proj, q);
        }
    }
    members
        .iter()
        .map(|&drop| dist_rec(points, q, mask & !(1 << drop)))
        .fold(f64::INFINITY, f64::min)
}
