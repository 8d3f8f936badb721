//! Finite-sample quantification of the operational domain in which a subject
//! vehicle is almost safe.
//!
//! The crate is `no_std` (with `alloc`). It covers the whole analysis chain
//! from recorded trajectories to a certificate:
//!
//! * [`ingest`]: raw multi-agent samples, dataset validation and collision
//!   labelling.
//! * [`oss`]: projection of agent tracks into operational state spaces
//!   (lead following, multi-vehicle, vehicle-pedestrian, combined).
//! * [`safe_set`]: safe-transition graph and pruning of states connected to
//!   unsafe trajectories.
//! * [`geometry`]: exact-predicate Delaunay triangulation, alpha complexes,
//!   optimal-alpha search, clustering and Monte-Carlo volumes.
//! * [`metrics`]: almost-invariance bounds, replay expectations, coverage and
//!   the TTC / mileage baselines.
//! * [`simgen`]: IDM car-following simulator and the 48-scenario battery.
//! * [`analysis`]: the end-to-end pipeline over an in-memory dataset.
//!
//! File formats, configuration and the command line live in the companion
//! `safeset` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "parallel")]
extern crate std;

pub mod analysis;
pub mod geometry;
pub mod ingest;
pub mod metrics;
pub mod oss;
mod par;
pub mod safe_set;
pub mod simgen;

pub use analysis::{analyze, AnalysisError, AnalysisOptions, AnalysisOutcome};
pub use geometry::{AlphaShape, GeometryError, ShapeUnion, SimplicialComplex};
pub use ingest::{AgentType, CollisionEvent, CollisionRule, Dataset, IngestError, RawSample};
pub use oss::{OssKind, OssSpec, OssState, StateTrajectory, TransitionSet};
pub use safe_set::{ReachMode, SafeGraph};
