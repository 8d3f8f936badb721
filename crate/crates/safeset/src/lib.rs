//! File formats, configuration, reports and the command line around
//! `safeset-core`.
//!
//! [`run_analysis`] reads a recording described by an [`AnalysisConfig`],
//! runs the core pipeline and returns the report together with the
//! in-memory outcome; [`report::emit_report`] writes the output files.

pub mod config;
pub mod csvio;
pub mod report;
pub mod slices;

use safeset_core::analysis::{analyze, AnalysisError, AnalysisOutcome};
use safeset_core::ingest::Dataset;
use safeset_core::simgen::SimError;
use safeset_core::{GeometryError, OssSpec};
use thiserror::Error;

pub use config::AnalysisConfig;
pub use csvio::{ColumnMap, CsvError};
pub use report::{emit_report, AnalysisReport};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SAFESET_THREADS";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Csv(CsvError::Csv(e))
    }
}

impl RunError {
    /// 2 for invalid input or options, 3 when excluded states fall inside
    /// the shape, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Analysis(AnalysisError::ExclusionViolated { .. }) => 3,
            RunError::Analysis(AnalysisError::InvalidOption(_) | AnalysisError::Metrics(_) | AnalysisError::Oss(_)) => 2,
            RunError::Csv(CsvError::MissingColumn(_) | CsvError::MalformedRow { .. } | CsvError::UnknownField(_) | CsvError::Ingest(_)) => 2,
            RunError::Simulation(SimError::InvalidParams(_) | SimError::InvalidScenario(_)) => 2,
            _ => 1,
        }
    }
}

/// Sizes the global worker pool from [`THREADS_ENV`] when set.
pub fn init_threads() -> Result<(), RunError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| RunError::Validation(format!("{THREADS_ENV} must be a positive integer")))?;
    if n == 0 {
        return Err(RunError::Validation(format!("{THREADS_ENV} must be a positive integer")));
    }
    // A pool that already exists keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Result of one run.
#[derive(Debug)]
pub struct Analysis {
    pub spec: OssSpec,
    pub dataset: Dataset,
    pub outcome: AnalysisOutcome,
    pub report: AnalysisReport,
}

/// Analyses an in-memory dataset under `cfg`.
pub fn analyze_dataset(cfg: &AnalysisConfig, dataset: Dataset) -> Result<Analysis, RunError> {
    let opts = cfg.options()?;
    let outcome = analyze(&dataset, &opts)?;
    let report = AnalysisReport::build(cfg, &opts.spec, &outcome);
    Ok(Analysis { spec: opts.spec, dataset, outcome, report })
}

/// Validates `cfg`, reads its inputs and analyses them.
pub fn run_analysis(cfg: &AnalysisConfig) -> Result<Analysis, RunError> {
    cfg.validate()?;
    let columns = ColumnMap::from(cfg.columns.clone());
    let d = csvio::read_dataset(&cfg.input, &columns, cfg.collisions.as_deref())?;
    analyze_dataset(cfg, d)
}
