//! Analysis configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use safeset_core::ingest::CollisionRule;
use safeset_core::{AnalysisOptions, OssSpec, ReachMode};
use serde::{Deserialize, Serialize};

use crate::RunError;

/// State-space choice: a preset name or a full specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OssChoice {
    Preset(String),
    Spec(OssSpec),
}

impl OssChoice {
    pub fn resolve(&self) -> Result<OssSpec, RunError> {
        let spec = match self {
            OssChoice::Preset(name) => OssSpec::preset(name).map_err(|e| RunError::Validation(e.to_string()))?,
            OssChoice::Spec(s) => s.clone(),
        };
        spec.validate().map_err(|e| RunError::Validation(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaConfig {
    pub lo: f64,
    pub hi: f64,
    pub threshold: f64,
}

impl Default for AlphaConfig {
    fn default() -> Self {
        Self { lo: 0.01, hi: 100.0, threshold: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SliceConfig {
    pub resolution: usize,
    /// Width of the subject-speed band each slice covers.
    pub band_width: f64,
    /// Number of bands for three-dimensional spaces.
    pub max_bands: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self { resolution: 100, band_width: 1.0, max_bands: 3 }
    }
}

/// Inputs and settings of one analysis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub input: PathBuf,
    pub collisions: Option<PathBuf>,
    /// Logical field to CSV header.
    pub columns: BTreeMap<String, String>,
    pub oss: OssChoice,
    pub collision_rule: CollisionRule,
    pub beta: f64,
    pub alpha: AlphaConfig,
    pub reach_mode: ReachMode,
    pub match_radius: f64,
    pub cluster_max: Option<usize>,
    pub max_exact_dim: usize,
    pub mc_samples: usize,
    pub seed: u64,
    pub tighten_alpha: bool,
    pub output_dir: PathBuf,
    pub slices: SliceConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let base = AnalysisOptions::new(OssSpec::preset("highd-lead").expect("preset"));
        Self {
            input: PathBuf::new(),
            collisions: None,
            columns: BTreeMap::new(),
            oss: OssChoice::Preset("highd-lead".into()),
            collision_rule: base.collision_rule,
            beta: base.beta,
            alpha: AlphaConfig { lo: base.alpha_lo, hi: base.alpha_hi, threshold: base.alpha_threshold },
            reach_mode: base.reach_mode,
            match_radius: base.match_radius,
            cluster_max: base.cluster_max,
            max_exact_dim: base.max_exact_dim,
            mc_samples: base.mc_samples,
            seed: base.seed,
            tighten_alpha: base.tighten_alpha,
            output_dir: PathBuf::from("out"),
            slices: SliceConfig::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?;
        // Relative inputs are resolved against the config file.
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [Some(&mut cfg.input), cfg.collisions.as_mut(), Some(&mut cfg.output_dir)].into_iter().flatten() {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn options(&self) -> Result<AnalysisOptions, RunError> {
        let mut o = AnalysisOptions::new(self.oss.resolve()?);
        o.collision_rule = self.collision_rule;
        o.beta = self.beta;
        o.reach_mode = self.reach_mode;
        o.match_radius = self.match_radius;
        o.alpha_lo = self.alpha.lo;
        o.alpha_hi = self.alpha.hi;
        o.alpha_threshold = self.alpha.threshold;
        o.max_exact_dim = self.max_exact_dim;
        o.cluster_max = self.cluster_max;
        o.mc_samples = self.mc_samples;
        o.seed = self.seed;
        o.tighten_alpha = self.tighten_alpha;
        o.validate().map_err(|e| RunError::Validation(e.to_string()))?;
        Ok(o)
    }

    /// Checks the option values and that every referenced file exists.
    pub fn validate(&self) -> Result<(), RunError> {
        self.options()?;
        if self.slices.resolution == 0 || !(self.slices.band_width > 0.0) {
            return Err(RunError::Validation("slice resolution and band width must be positive".into()));
        }
        for p in std::iter::once(&self.input).chain(&self.collisions) {
            if !p.is_file() {
                return Err(RunError::Validation(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let c: AnalysisConfig = serde_json::from_str(r#"{"input": "d.csv", "oss": "ncap-lead", "beta": 0.01}"#).unwrap();
        assert_eq!(c.beta, 0.01);
        assert_eq!(c.alpha, AlphaConfig::default());
        assert_eq!(c.slices.resolution, 100);
        assert_eq!(c.options().unwrap().spec, OssSpec::preset("ncap-lead").unwrap());
    }

    #[test]
    fn explicit_spec_and_enums() {
        let spec = serde_json::to_value(OssSpec::preset("highd-multi").unwrap()).unwrap();
        let v = serde_json::json!({"oss": spec, "reach_mode": "ancestors", "collision_rule": "either"});
        let c: AnalysisConfig = serde_json::from_value(v).unwrap();
        assert_eq!(c.reach_mode, ReachMode::Ancestors);
        assert_eq!(c.collision_rule, CollisionRule::Either);
        assert_eq!(c.options().unwrap().spec.dim(), 13);
    }

    #[test]
    fn invalid_values_are_validation_errors() {
        let c = AnalysisConfig { beta: 1.5, ..Default::default() };
        assert!(matches!(c.options(), Err(RunError::Validation(_))));
        let c = AnalysisConfig { oss: OssChoice::Preset("nope".into()), ..Default::default() };
        assert!(matches!(c.options(), Err(RunError::Validation(_))));
        assert!(serde_json::from_str::<AnalysisConfig>(r#"{"bogus": 1}"#).is_err());
        let missing = AnalysisConfig { input: "/nonexistent/file.csv".into(), ..Default::default() };
        assert!(matches!(missing.validate(), Err(RunError::Validation(_))));
    }
}
