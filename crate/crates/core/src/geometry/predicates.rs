//! Sign-exact determinant predicates on integer coordinates.
//!
//! Coordinates are snapped to an integer grid before triangulation, so the
//! orientation and in-sphere tests below are evaluated exactly. A floating
//! point evaluation with a generous relative threshold filters the easy
//! cases; everything else falls through to fraction-free Bareiss
//! elimination on big integers.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Largest matrix order handled on the stack.
pub const MAX_ORDER: usize = 9;

/// Relative threshold (against the Hadamard bound) above which the floating
/// point determinant sign is trusted.
const FILTER_RATIO: f64 = 1e-10;

/// Sign of the determinant of a `k x k` row-major integer matrix.
pub fn det_sign(m: &[i128], k: usize) -> Ordering {
    debug_assert_eq!(m.len(), k * k);
    if let Some(s) = det_sign_filtered(m, k) {
        return s;
    }
    det_sign_exact(m, k)
}

fn det_sign_filtered(m: &[i128], k: usize) -> Option<Ordering> {
    let mut a = [0.0f64; MAX_ORDER * MAX_ORDER];
    for (dst, &v) in a.iter_mut().zip(m) {
        *dst = v as f64;
    }
    // Elimination with row pivoting is invariant under column scaling, so
    // the tighter of the row and column Hadamard bounds applies.
    let mut by_rows = 1.0f64;
    let mut by_cols = 1.0f64;
    for i in 0..k {
        let row = libm::sqrt((0..k).map(|c| a[i * k + c] * a[i * k + c]).sum::<f64>());
        let col = libm::sqrt((0..k).map(|r| a[r * k + i] * a[r * k + i]).sum::<f64>());
        if row == 0.0 || col == 0.0 {
            return Some(Ordering::Equal);
        }
        by_rows *= row;
        by_cols *= col;
    }
    let hadamard = by_rows.min(by_cols);
    if !hadamard.is_finite() {
        return None;
    }
    let mut det = 1.0f64;
    for col in 0..k {
        let mut piv = col;
        let mut best = libm::fabs(a[col * k + col]);
        for r in col + 1..k {
            let v = libm::fabs(a[r * k + col]);
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(col * k + c, piv * k + c);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for r in col + 1..k {
            let f = a[r * k + col] / p;
            if f != 0.0 {
                for c in col + 1..k {
                    a[r * k + c] -= f * a[col * k + c];
                }
            }
        }
    }
    if libm::fabs(det) > FILTER_RATIO * hadamard {
        Some(if det > 0.0 { Ordering::Greater } else { Ordering::Less })
    } else {
        None
    }
}

fn det_sign_exact(m: &[i128], k: usize) -> Ordering {
    let mut a: Vec<BigInt> = m.iter().map(|&v| BigInt::from(v)).collect();
    let mut sign = 1i32;
    let mut prev = BigInt::from(1);
    for i in 0..k {
        if a[i * k + i].is_zero() {
            let Some(r) = (i + 1..k).find(|&r| !a[r * k + i].is_zero()) else {
                return Ordering::Equal;
            };
            for c in 0..k {
                a.swap(i * k + c, r * k + c);
            }
            sign = -sign;
        }
        if i + 1 == k {
            break;
        }
        for r in i + 1..k {
            for c in i + 1..k {
                let v = (&a[r * k + c] * &a[i * k + i] - &a[r * k + i] * &a[i * k + c]) / &prev;
                a[r * k + c] = v;
            }
        }
        prev = a[i * k + i].clone();
    }
    let last = &a[k * k - 1];
    let s = if last.is_zero() {
        0
    } else if last.is_positive() {
        sign
    } else {
        -sign
    };
    s.cmp(&0)
}

/// Orientation of `d + 1` points in `d` dimensions: sign of
/// `det[p1 - p0, ..., pd - p0]`.
pub fn orient(points: &[&[i64]], d: usize) -> Ordering {
    debug_assert_eq!(points.len(), d + 1);
    let mut m = [0i128; MAX_ORDER * MAX_ORDER];
    let p0 = points[0];
    for (r, p) in points[1..].iter().enumerate() {
        for c in 0..d {
            m[r * d + c] = i128::from(p[c]) - i128::from(p0[c]);
        }
    }
    det_sign(&m[..d * d], d)
}

/// Raw lifted determinant `det[(p_i - q, |p_i - q|^2)]` over the `d + 1`
/// simplex vertices. Its sign relative to the orientation of the simplex
/// decides whether `q` lies inside the circumsphere; callers multiply by the
/// per-dimension convention sign (see [`insphere_convention`]).
pub fn lifted_det(points: &[&[i64]], q: &[i64], d: usize) -> Ordering {
    debug_assert_eq!(points.len(), d + 1);
    let k = d + 1;
    let mut m = [0i128; MAX_ORDER * MAX_ORDER];
    for (r, p) in points.iter().enumerate() {
        let mut sq: i128 = 0;
        for c in 0..d {
            let diff = i128::from(p[c]) - i128::from(q[c]);
            m[r * k + c] = diff;
            sq += diff * diff;
        }
        m[r * k + d] = sq;
    }
    det_sign(&m[..k * k], k)
}

/// Sign that maps [`lifted_det`] of a positively oriented simplex to
/// "strictly inside the circumsphere" in dimension `d`.
pub fn insphere_convention(d: usize) -> Ordering {
    // Reference simplex (0, 1000 e_1, ..., 1000 e_d) and an interior point.
    let mut verts: Vec<Vec<i64>> = Vec::with_capacity(d + 1);
    verts.push(alloc::vec![0; d]);
    for i in 0..d {
        let mut v = alloc::vec![0; d];
        v[i] = 1000;
        verts.push(v);
    }
    let q: Vec<i64> = alloc::vec![1000 / (2 * d as i64 + 2); d];
    let refs: Vec<&[i64]> = verts.iter().map(|v| v.as_slice()).collect();
    debug_assert_eq!(orient(&refs, d), Ordering::Greater);
    lifted_det(&refs, &q, d)
}
