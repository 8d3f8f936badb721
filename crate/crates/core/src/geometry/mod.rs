//! Alpha-shape kernel.
//!
//! The alpha shape of a finite point set is realised through the alpha
//! complex: Delaunay simplices whose filtration radius (radius of the
//! minimum enclosing ball of the simplex) does not exceed `alpha`. For
//! points in general position its boundary is exactly the set of
//! alpha-exposed simplices; `alpha = 0` leaves the bare points and a large
//! enough `alpha` gives the convex hull.
//!
//! Heterogeneous state units are handled by the caller mapping every
//! dimension affinely to `[0, 1]` ([`Normalizer`]) before any geometry, so
//! `alpha` is dimensionless.

use alloc::vec::Vec;

use thiserror::Error;

mod alpha;
mod cluster;
mod complex;
pub mod delaunay;
mod frame;
mod hull;
mod montecarlo;
mod normalize;
pub mod predicates;
pub mod simplex;
mod union;

pub use alpha::{alpha_complex, search_optimal_alpha, search_optimal_alpha_in, AlphaSearch, AlphaShape};
pub use cluster::{hierarchical_cluster, ClusterNode, ClusterTree};
pub use complex::{delaunay, SimplicialComplex};
pub use frame::AffineFrame;
pub use hull::HullRegion;
pub use montecarlo::{mc_volume, McVolume, MIN_SAMPLES};
pub use normalize::Normalizer;
pub use union::{check_exclusion, RegionShape, ShapeUnion, UnionMember, UnionOptions};

/// Default cap on the dimension handled by exact Delaunay triangulation.
pub const DEFAULT_MAX_EXACT_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("points are affinely dependent; no full-dimensional simplex exists")]
    DegenerateInput,
    #[error("dimension {dim} exceeds the exact triangulation cap {max}")]
    DimensionTooHigh { dim: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("no single polytope covers all points even at alpha = {hi}")]
    InfeasibleAtHi { hi: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

/// A region of `R^n` that answers point membership queries.
pub trait Membership {
    fn dim(&self) -> usize;
    fn contains(&self, p: &[f64]) -> Result<bool, GeometryError>;
}

pub(crate) fn bounding_box(points: &[Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = alloc::vec![f64::INFINITY; dim];
    let mut hi = alloc::vec![f64::NEG_INFINITY; dim];
    for p in points {
        for c in 0..dim {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    (lo, hi)
}

pub(crate) fn in_box(p: &[f64], lo: &[f64], hi: &[f64], tol: f64) -> bool {
    p.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
}
