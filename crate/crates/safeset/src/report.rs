//! Report assembly and output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use safeset_core::analysis::{AnalysisOutcome, DatasetSummary, ShapeSummary};
use safeset_core::geometry::{Normalizer, RegionShape};
use safeset_core::metrics::{BaselineResult, CoverageResult, EpsilonResult};
use safeset_core::oss::{OssKind, OssSpec};
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::slices::{plan_slices, rasterize, SlicePlan};
use crate::RunError;

pub const SCHEMA_VERSION: &str = "1.0.0";
pub const GENERATOR: &str = concat!("safeset ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceSummary {
    pub kind: OssKind,
    pub dimension_names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafeStateSummary {
    pub count: usize,
    /// Share of the distinct observed states kept as potentially safe.
    pub fraction: f64,
    pub proper_subset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: String,
    pub generator: String,
    pub config: AnalysisConfig,
    pub state_space: StateSpaceSummary,
    pub dataset: DatasetSummary,
    pub safe_states: SafeStateSummary,
    pub shape: ShapeSummary,
    pub epsilon: EpsilonResult,
    pub coverage: CoverageResult,
    /// Safe states per unit of physical shape volume.
    pub physical_density: Option<f64>,
    pub baseline: BaselineResult,
    pub warnings: Vec<String>,
    pub slices: Vec<SlicePlan>,
}

impl AnalysisReport {
    pub fn build(cfg: &AnalysisConfig, spec: &OssSpec, out: &AnalysisOutcome) -> Self {
        let bounds = spec.dimension_bounds();
        let ds = out.safe_states.len();
        let distinct = out.dataset.distinct_states;
        let phys = out.shape_summary.measure_physical;
        Self {
            schema_version: SCHEMA_VERSION.into(),
            generator: GENERATOR.into(),
            config: cfg.clone(),
            state_space: StateSpaceSummary {
                kind: spec.kind,
                dimension_names: spec.dimension_names(),
                lower: bounds.iter().map(|b| b.lo).collect(),
                upper: bounds.iter().map(|b| b.hi).collect(),
                volume: spec.volume(),
            },
            dataset: out.dataset.clone(),
            safe_states: SafeStateSummary {
                count: ds,
                fraction: if distinct == 0 { 0.0 } else { ds as f64 / distinct as f64 },
                proper_subset: ds < distinct,
            },
            shape: out.shape_summary.clone(),
            epsilon: out.epsilon.clone(),
            coverage: out.coverage.clone(),
            physical_density: (phys > 0.0).then(|| ds as f64 / phys),
            baseline: out.baseline.clone(),
            warnings: out.warnings.clone(),
            slices: plan_slices(spec, out.safe_states.points(), &cfg.slices),
        }
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberExport {
    pub kind: String,
    pub size: usize,
    pub intrinsic_dim: usize,
    pub alpha: Option<f64>,
    pub measure: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Vertices in physical units.
    pub vertices: Vec<Vec<f64>>,
    /// Included simplices as vertex indices; empty for hulls and points.
    pub simplices: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeExport {
    pub schema_version: String,
    pub dimension_names: Vec<String>,
    pub normalizer: Normalizer,
    pub empty: bool,
    pub members: Vec<MemberExport>,
}

impl ShapeExport {
    pub fn build(spec: &OssSpec, out: &AnalysisOutcome) -> Self {
        let nz = &out.normalizer;
        let members = out.shape.as_ref().map_or_else(Vec::new, |u| {
            u.members()
                .iter()
                .map(|m| {
                    let (vertices, simplices) = match &m.region {
                        RegionShape::Alpha { frame, shape, .. } => {
                            let c = shape.complex();
                            let v = (0..c.num_points() as u32).map(|i| nz.inverse(&frame.lift(c.point(i)))).collect();
                            (v, shape.included_simplices().map(<[u32]>::to_vec).collect())
                        }
                        RegionShape::Hull { hull, .. } => (hull.points().iter().map(|p| nz.inverse(p)).collect(), Vec::new()),
                        RegionShape::Point(p) => (vec![nz.inverse(p)], Vec::new()),
                    };
                    MemberExport {
                        kind: m.region.kind().into(),
                        size: m.size,
                        intrinsic_dim: m.region.intrinsic_dim(),
                        alpha: m.region.alpha(),
                        measure: m.measure,
                        lower: nz.inverse(&m.lo),
                        upper: nz.inverse(&m.hi),
                        vertices,
                        simplices,
                    }
                })
                .collect()
        });
        Self {
            schema_version: SCHEMA_VERSION.into(),
            dimension_names: spec.dimension_names(),
            normalizer: nz.clone(),
            empty: out.shape.is_none(),
            members,
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), RunError> {
    let path = dir.join(name);
    let f = File::create(&path)?;
    Ok((path, BufWriter::new(f)))
}

/// Writes `report.json`, `shape.json`, `ds.csv` and every planned slice.
/// Returns the written paths.
pub fn emit_report(report: &AnalysisReport, spec: &OssSpec, out: &AnalysisOutcome, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let (p, mut w) = create(dir, "report.json")?;
    w.write_all(report.to_json()?.as_bytes())?;
    w.flush()?;
    written.push(p);

    let (p, mut w) = create(dir, "shape.json")?;
    serde_json::to_writer(&mut w, &ShapeExport::build(spec, out))?;
    w.write_all(b"\n")?;
    w.flush()?;
    written.push(p);

    let (p, w) = create(dir, "ds.csv")?;
    crate::csvio::write_points(w, &spec.dimension_names(), out.safe_states.points())?;
    written.push(p);

    for plan in &report.slices {
        let raster = rasterize(out, spec, plan, report.config.slices.resolution)?;
        let (p, w) = create(dir, &plan.file_name)?;
        raster.write_csv(w)?;
        written.push(p);
    }
    Ok(written)
}
