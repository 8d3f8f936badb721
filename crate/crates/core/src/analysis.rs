//! End-to-end quantification over an in-memory dataset.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Membership, Normalizer, RegionShape, ShapeUnion, UnionOptions, DEFAULT_MAX_EXACT_DIM};
use crate::ingest::{CollisionRule, Dataset};
use crate::metrics::{
    check_beta, count_trailing_safe, coverage, fatality_rate_bound, ttc_stats, BaselineResult, CoverageResult, EpsilonResult,
    MetricsError,
};
use crate::oss::{extract_states, transitions, OssError, OssKind, OssSpec, StateTrajectory};
use crate::safe_set::{excluded_states, extract_safe_states, partition_transitions, ReachMode, StateSet};

pub const MDP_DISCLAIMER: &str =
    "The certificate assumes the closed-loop motion follows a Markov decision process over the observed state space.";
pub const IID_DISCLAIMER: &str = "The certificate assumes the collected transitions are independent and identically distributed.";
pub const NORMALIZATION_NOTE: &str =
    "Geometry runs on states mapped affinely to [0, 1] per dimension; alpha and density are in normalized units.";

/// Cluster size cap used when the state dimension is within the exact
/// triangulation cap.
pub const LOW_DIM_CLUSTER_MAX: usize = 100_000;
/// Cluster size cap used above it.
pub const HIGH_DIM_CLUSTER_MAX: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub spec: OssSpec,
    pub collision_rule: CollisionRule,
    pub beta: f64,
    pub reach_mode: ReachMode,
    pub match_radius: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub alpha_threshold: f64,
    pub max_exact_dim: usize,
    /// Defaults by dimension when absent.
    pub cluster_max: Option<usize>,
    pub mc_samples: usize,
    pub seed: u64,
    /// Lower the alpha of clusters whose shape swallows excluded states
    /// instead of failing outright.
    pub tighten_alpha: bool,
}

impl AnalysisOptions {
    pub fn new(spec: OssSpec) -> Self {
        Self {
            spec,
            collision_rule: CollisionRule::LabelsOnly,
            beta: 0.001,
            reach_mode: ReachMode::Undirected,
            match_radius: 0.0,
            alpha_lo: 0.01,
            alpha_hi: 100.0,
            alpha_threshold: 0.1,
            max_exact_dim: DEFAULT_MAX_EXACT_DIM,
            cluster_max: None,
            mc_samples: 20_000,
            seed: 0,
            tighten_alpha: true,
        }
    }

    pub fn effective_cluster_max(&self) -> usize {
        self.cluster_max.unwrap_or(if self.spec.dim() <= self.max_exact_dim {
            LOW_DIM_CLUSTER_MAX
        } else {
            HIGH_DIM_CLUSTER_MAX
        })
    }

    pub fn union_options(&self) -> UnionOptions {
        UnionOptions {
            alpha_lo: self.alpha_lo,
            alpha_hi: self.alpha_hi,
            alpha_threshold: self.alpha_threshold,
            max_exact_dim: self.max_exact_dim,
            cluster_max: self.effective_cluster_max(),
            mc_samples: self.mc_samples,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        check_beta(self.beta)?;
        self.spec.validate()?;
        if !(self.match_radius >= 0.0 && self.match_radius.is_finite()) {
            return Err(AnalysisError::InvalidOption("match radius must be finite and non-negative"));
        }
        if !(self.alpha_lo > 0.0 && self.alpha_hi > self.alpha_lo && self.alpha_hi.is_finite()) {
            return Err(AnalysisError::InvalidOption("alpha bounds must satisfy 0 < lo < hi"));
        }
        if !(self.alpha_threshold > 0.0) {
            return Err(AnalysisError::InvalidOption("alpha threshold must be positive"));
        }
        if self.mc_samples < crate::geometry::MIN_SAMPLES {
            return Err(AnalysisError::InvalidOption("too few Monte-Carlo samples"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Oss(#[from] OssError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid option: {0}")]
    InvalidOption(&'static str),
    #[error(
        "{violations} excluded states fall inside the shape of the safe states; \
         try a smaller alpha range, a positive match radius or another reachability mode"
    )]
    ExclusionViolated { violations: usize, excluded: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub trajectories: usize,
    pub safe_trajectories: usize,
    pub unsafe_trajectories: usize,
    pub collision_events: usize,
    /// Observed states, with multiplicity.
    pub states: usize,
    pub distinct_states: usize,
    pub transitions: usize,
    pub safe_transitions: usize,
    pub other_transitions: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub kind: String,
    pub size: usize,
    pub intrinsic_dim: usize,
    pub alpha: Option<f64>,
    /// Alpha found by the search, when it was tightened afterwards.
    pub searched_alpha: Option<f64>,
    pub measure: f64,
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub empty: bool,
    /// Alpha of the only member, when the union has a single alpha member.
    pub alpha_star: Option<f64>,
    pub members: Vec<MemberSummary>,
    pub clusters: usize,
    pub cluster_max: usize,
    pub measure_normalized: f64,
    pub measure_half_width: f64,
    pub measure_physical: f64,
    pub exact: bool,
    pub components: usize,
    pub single_polytopes: bool,
    pub searches_monotone: bool,
    pub exclusion_passed: bool,
    pub excluded_states: usize,
    pub tightened_members: usize,
}

/// Everything the pipeline produced.
#[derive(Debug, Clone)]
pub struct AnalysisOutcome {
    pub trajectories: Vec<StateTrajectory>,
    pub safe_states: StateSet,
    pub normalizer: Normalizer,
    pub shape: Option<ShapeUnion>,
    pub dataset: DatasetSummary,
    pub shape_summary: ShapeSummary,
    pub epsilon: EpsilonResult,
    pub coverage: CoverageResult,
    pub baseline: BaselineResult,
    pub warnings: Vec<String>,
}

impl AnalysisOutcome {
    /// Membership of a physical state in the final shape.
    pub fn contains(&self, values: &[f64]) -> Result<bool, GeometryError> {
        match &self.shape {
            Some(s) => s.contains(&self.normalizer.forward(values)),
            None => Ok(false),
        }
    }
}

/// Distance driven by every subject vehicle, in kilometers.
pub fn subject_distance_km(d: &Dataset) -> f64 {
    let samples = d.samples();
    let mut meters = 0.0;
    for scene in d.scenes() {
        for w in scene.frames.windows(2) {
            let (a, b) = (&samples[w[0].sv], &samples[w[1].sv]);
            meters += libm::hypot(b.x - a.x, b.y - a.y);
        }
    }
    meters / 1000.0
}

fn summarize_members(u: &ShapeUnion) -> Vec<MemberSummary> {
    u.members()
        .iter()
        .map(|m| MemberSummary {
            kind: m.region.kind().to_string(),
            size: m.size,
            intrinsic_dim: m.region.intrinsic_dim(),
            alpha: m.region.alpha(),
            searched_alpha: m.region.searched_alpha(),
            measure: m.measure,
            components: match &m.region {
                RegionShape::Alpha { shape, .. } => shape.component_count(),
                _ => 1,
            },
        })
        .collect()
}

fn count_inside(u: &ShapeUnion, pts: &[Vec<f64>]) -> Result<usize, GeometryError> {
    let hits = crate::par::map(pts, |p| u.contains(p));
    let mut n = 0;
    for h in hits {
        n += usize::from(h?);
    }
    Ok(n)
}

/// Runs labelling, state extraction, safe-state pruning, shape
/// construction, the exclusion check, the certificates, coverage and the
/// baselines.
pub fn analyze(d: &Dataset, opts: &AnalysisOptions) -> Result<AnalysisOutcome, AnalysisError> {
    opts.validate()?;
    let labelled = crate::ingest::label_collisions(d, opts.collision_rule);
    let ts = extract_states(&labelled, &opts.spec)?;
    let normalizer = opts.spec.normalizer();

    let (ds, _graph) = extract_safe_states(&ts, opts.reach_mode, opts.match_radius);
    let td = transitions(&ts);
    let (td_s, rest) = partition_transitions(&td, &ds);
    let excluded = excluded_states(&ts, &ds);
    let all_states: usize = ts.iter().map(|t| t.states.len()).sum();
    let unsafe_trajectories = ts.iter().filter(|t| t.is_unsafe()).count();

    let union_opts = opts.union_options();
    let mut shape = if ds.is_empty() {
        None
    } else {
        let pts: Vec<Vec<f64>> = ds.points().iter().map(|p| normalizer.forward(p)).collect();
        Some(ShapeUnion::build(&pts, &union_opts)?)
    };

    let excluded_norm: Vec<Vec<f64>> = excluded.points().iter().map(|p| normalizer.forward(p)).collect();
    let mut tightened = 0;
    if let Some(u) = &mut shape {
        let mut violations = count_inside(u, &excluded_norm)?;
        if violations > 0 && opts.tighten_alpha {
            tightened = u.tighten_for_exclusion(&excluded_norm, &union_opts)?;
            violations = count_inside(u, &excluded_norm)?;
        }
        if violations > 0 {
            return Err(AnalysisError::ExclusionViolated { violations, excluded: excluded_norm.len() });
        }
    }

    let inside: Vec<bool> = match &shape {
        Some(u) => {
            let flags = crate::par::map(&td.pairs, |(a, b)| -> Result<bool, GeometryError> {
                Ok(u.contains(&normalizer.forward(&a.values))? && u.contains(&normalizer.forward(&b.values))?)
            });
            flags.into_iter().collect::<Result<_, _>>()?
        }
        None => alloc::vec![false; td.len()],
    };
    let pairs: Vec<(bool, bool)> = inside.iter().map(|&f| (f, f)).collect();
    let n_trailing = count_trailing_safe(&pairs, |x| *x);
    let epsilon = EpsilonResult::compute(td_s.len(), rest.len(), Some(n_trailing), opts.beta)?;

    let measure = shape.as_ref().map_or(0.0, |u| u.measure());
    let cov = coverage(ds.len(), measure, 1.0)?;

    let collisions = labelled.has_collisions() || unsafe_trajectories > 0;
    let ttc = (opts.spec.kind == OssKind::LeadFollowing).then(|| ttc_stats(&ts));
    let km = (!collisions).then(|| subject_distance_km(&labelled)).filter(|k| *k > 0.0);
    let baseline = BaselineResult {
        ttc_mean: ttc.and_then(|t| t.mean),
        ttc_std: ttc.and_then(|t| t.std),
        ttc_valid_rate: ttc.and_then(|t| t.valid_rate),
        safe_distance_km: km,
        fatality_bound: km.map(|k| fatality_rate_bound(k, opts.beta, false)).transpose()?,
    };

    let mut warnings = alloc::vec![MDP_DISCLAIMER.to_string(), IID_DISCLAIMER.to_string(), NORMALIZATION_NOTE.to_string()];
    let shape_summary = match &shape {
        Some(u) => {
            if !u.all_single_polytopes() {
                warnings.push("Some clusters admit no single polytope within the alpha bounds; their shape uses the upper bound.".to_string());
            }
            if tightened > 0 {
                warnings.push(alloc::format!(
                    "Alpha was lowered below the search result in {tightened} cluster(s) to keep excluded states outside the shape."
                ));
            }
            if !u.is_exact() {
                warnings.push("The shape measure is a Monte-Carlo estimate.".to_string());
            }
            let members = summarize_members(u);
            let alpha_star = match members.as_slice() {
                [only] => only.alpha,
                _ => None,
            };
            ShapeSummary {
                empty: false,
                alpha_star,
                clusters: u.tree().num_leaves(),
                cluster_max: union_opts.cluster_max,
                measure_normalized: u.measure(),
                measure_half_width: u.measure_half_width(),
                measure_physical: u.measure() * normalizer.volume_scale(),
                exact: u.is_exact(),
                components: u.component_count(),
                single_polytopes: u.all_single_polytopes(),
                searches_monotone: u.all_searches_monotone(),
                exclusion_passed: true,
                excluded_states: excluded_norm.len(),
                tightened_members: tightened,
                members,
            }
        }
        None => {
            warnings.push("No potentially safe states remain; the shape is empty.".to_string());
            ShapeSummary {
                empty: true,
                alpha_star: None,
                members: Vec::new(),
                clusters: 0,
                cluster_max: union_opts.cluster_max,
                measure_normalized: 0.0,
                measure_half_width: 0.0,
                measure_physical: 0.0,
                exact: true,
                components: 0,
                single_polytopes: true,
                searches_monotone: true,
                exclusion_passed: true,
                excluded_states: excluded_norm.len(),
                tightened_members: 0,
            }
        }
    };

    let distinct = StateSet::from_values(ts.iter().flat_map(|t| t.states.iter().map(|s| s.values.clone()))).len();
    let dataset = DatasetSummary {
        trajectories: ts.len(),
        safe_trajectories: ts.len() - unsafe_trajectories,
        unsafe_trajectories,
        collision_events: labelled.collision_events().len(),
        states: all_states,
        distinct_states: distinct,
        transitions: td.len(),
        safe_transitions: td_s.len(),
        other_transitions: rest.len(),
        dt: labelled.dt(),
    };

    Ok(AnalysisOutcome {
        trajectories: ts,
        safe_states: ds,
        normalizer,
        shape,
        dataset,
        shape_summary,
        epsilon,
        coverage: cov,
        baseline,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AgentType, RawSample};
    use alloc::format;
    use alloc::vec;

    fn car(tid: &str, agent: &str, frame: u64, x: f64, v: f64, sv: bool) -> RawSample {
        RawSample {
            recording_id: "r".into(),
            trajectory_id: tid.into(),
            frame,
            time: frame as f64 * 0.04,
            agent_id: agent.into(),
            agent_type: AgentType::Car,
            x,
            y: 0.0,
            vx: v,
            vy: 0.0,
            length: 4.0,
            width: 2.0,
            lane_id: Some(1),
            sv_flag: sv,
        }
    }

    /// Collision-free following at varied gaps and speeds.
    fn following() -> Dataset {
        let mut samples = Vec::new();
        for k in 0..6 {
            let tid = format!("t{k}");
            let v0 = 22.0 + k as f64;
            for f in 0..40u64 {
                let t = f as f64 * 0.04;
                let v1 = v0 - 1.0 + 0.05 * f as f64;
                let x0 = v0 * t;
                let x1 = 15.0 + 3.0 * k as f64 + (v0 - 1.0) * t + 0.025 * 0.04 * (f * f) as f64;
                samples.push(car(&tid, "sv", f, x0, v0, true));
                samples.push(car(&tid, "lead", f, x1, v1, false));
            }
        }
        Dataset::new(samples, vec![]).unwrap()
    }

    fn opts() -> AnalysisOptions {
        AnalysisOptions::new(OssSpec::preset("highd-lead").unwrap())
    }

    #[test]
    fn rejects_bad_beta_first() {
        let o = AnalysisOptions { beta: 1.5, ..opts() };
        assert_eq!(analyze(&following(), &o).unwrap_err(), AnalysisError::Metrics(MetricsError::InvalidBeta(1.5)));
    }

    #[test]
    fn collision_free_run() {
        let d = following();
        let r = analyze(&d, &opts()).unwrap();
        assert_eq!(r.epsilon.c_count, 0);
        assert_eq!(r.dataset.unsafe_trajectories, 0);
        let eps_s = crate::metrics::epsilon_from_count(r.epsilon.s_count, 0.001).unwrap();
        assert_eq!(r.epsilon.epsilon_bar_exact, eps_s);
        assert!(r.baseline.safe_distance_km.unwrap() > 0.0);
        assert!(r.baseline.fatality_bound.is_some());
        assert!(r.coverage.occupancy > 0.0 && r.coverage.occupancy <= 1.0);
        for p in r.safe_states.points() {
            assert!(r.contains(p).unwrap());
        }
    }
}
