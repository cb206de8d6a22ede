//! Run configuration shared by the library pipeline and the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{FileFormat, LoadOptions, SplitParams};
use crate::ensemble::WeightPolicy;
use crate::ranker::RankerConfig;
use crate::recommenders::{BprParams, ModelKind, ModelParams, RankColumn, WarpParams, WrmfParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    /// Inferred from the extension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<FileFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<bool>,
}

impl DatasetConfig {
    pub fn format(&self) -> FileFormat {
        self.format.unwrap_or_else(|| FileFormat::from_path(&self.path))
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            rating_threshold: self.rating_threshold,
            header: self.header,
        }
    }
}

/// Built-in base models; a present table enables the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsConfig {
    #[serde(rename = "BPR", default, skip_serializing_if = "Option::is_none")]
    pub bpr: Option<BprParams>,
    #[serde(rename = "WARP", default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<WarpParams>,
    #[serde(rename = "WRMF", default, skip_serializing_if = "Option::is_none")]
    pub wrmf: Option<WrmfParams>,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self {
            bpr: Some(BprParams::default()),
            warp: Some(WarpParams::default()),
            wrmf: Some(WrmfParams::default()),
        }
    }
}

impl ModelsConfig {
    pub fn none() -> Self {
        Self {
            bpr: None,
            warp: None,
            wrmf: None,
        }
    }

    /// Enabled models in fixed BPR, WARP, WRMF order.
    pub fn enabled(&self) -> Vec<ModelParams> {
        let mut out = Vec::new();
        if let Some(p) = self.bpr {
            out.push(ModelParams::Bpr(p));
        }
        if let Some(p) = self.warp {
            out.push(ModelParams::Warp(p));
        }
        if let Some(p) = self.wrmf {
            out.push(ModelParams::Wrmf(p));
        }
        out
    }
}

/// Rankings produced outside this tool, one file per held-out stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    pub name: String,
    /// Lists computed from the training part, scored on validation.
    pub validation: PathBuf,
    /// Lists computed from train plus validation, scored on test.
    pub test: PathBuf,
    #[serde(default)]
    pub column: RankColumn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceChoice {
    /// Small ranges that finish quickly.
    #[default]
    Desk,
    /// The published ranges.
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneConfig {
    /// Random-search trials per base model; 0 keeps the configured values.
    pub budget: usize,
    pub space: SpaceChoice,
    /// Trials for each hypergraph regularizer.
    pub ranker_budget: usize,
    /// Trials for the hybrid weights.
    pub hybrid_budget: usize,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            budget: 30,
            space: SpaceChoice::Desk,
            ranker_budget: 8,
            hybrid_budget: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybridConfig {
    /// Weight per model name; missing names get 0.5.
    pub weights: BTreeMap<String, f64>,
}

/// Family weights for the weighted ensemble; model ranks come from validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    pub w_ui: f64,
    pub w_uu: f64,
    pub w_m_base: f64,
    pub decay_per_rank: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        let p = WeightPolicy::default();
        Self {
            w_ui: p.w_ui,
            w_uu: p.w_uu,
            w_m_base: p.w_m_base,
            decay_per_rank: p.decay_per_rank,
        }
    }
}

impl WeightsConfig {
    pub fn policy(&self, model_ranks: BTreeMap<String, usize>) -> Result<WeightPolicy> {
        WeightPolicy {
            w_ui: self.w_ui,
            w_uu: self.w_uu,
            w_m_base: self.w_m_base,
            decay_per_rank: self.decay_per_rank,
            model_ranks,
        }
        .validated()
    }
}

fn default_k() -> usize {
    10
}

fn default_seed() -> u64 {
    42
}

fn default_output() -> PathBuf {
    PathBuf::from("hypers-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub split: SplitParams,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_k")]
    pub k_nn: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub models: ModelsConfig,
    #[serde(default)]
    pub external: Vec<ExternalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tune: Option<TuneConfig>,
    #[serde(default)]
    pub ranker: RankerConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub hybrid: HybridConfig,
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>) -> Self {
        Self {
            dataset: DatasetConfig {
                path: dataset.into(),
                format: None,
                rating_threshold: None,
                header: None,
            },
            split: SplitParams::default(),
            seed: default_seed(),
            k: default_k(),
            k_nn: default_k(),
            output: default_output(),
            models: ModelsConfig::default(),
            external: Vec::new(),
            tune: None,
            ranker: RankerConfig::default(),
            weights: WeightsConfig::default(),
            hybrid: HybridConfig::default(),
        }
    }

    /// Resolves relative paths against `base` (the config file's directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset.path);
        for e in &mut self.external {
            fix(&mut e.validation);
            fix(&mut e.test);
        }
    }

    /// Checks parameter sanity and that every referenced input file exists.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.k_nn == 0 {
            return Err(Error::Config("k_nn must be >= 1".into()));
        }
        if !self.dataset.path.is_file() {
            return Err(Error::Config(format!(
                "dataset file not found: {}",
                self.dataset.path.display()
            )));
        }
        let mut names: Vec<String> = self
            .models
            .enabled()
            .iter()
            .map(|p| p.kind().name().to_owned())
            .collect();
        for e in &self.external {
            if e.name.is_empty() || e.name.contains(['/', '\\', ',']) {
                return Err(Error::Config(format!("invalid external model name `{}`", e.name)));
            }
            if ModelKind::ALL.iter().any(|k| k.name() == e.name)
                || ["H", "Hybrid", "HypeRS", "HypeRS_W"].contains(&e.name.as_str())
            {
                return Err(Error::Config(format!("external model name `{}` is reserved", e.name)));
            }
            for p in [&e.validation, &e.test] {
                if !p.is_file() {
                    return Err(Error::Config(format!(
                        "external rankings for `{}` not found: {}",
                        e.name,
                        p.display()
                    )));
                }
            }
            names.push(e.name.clone());
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::Config("model names must be unique".into()));
        }
        self.ranker.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.weights
            .policy(BTreeMap::new())
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some((name, w)) = self.hybrid.weights.iter().find(|(_, w)| !(**w > 0.0)) {
            return Err(Error::Config(format!(
                "hybrid weight for `{name}` must be > 0 (got {w})"
            )));
        }
        Ok(())
    }

    /// Names of all base models (built-in first, then external), in report order.
    pub fn model_names(&self) -> Vec<String> {
        self.models
            .enabled()
            .iter()
            .map(|p| p.kind().name().to_owned())
            .chain(self.external.iter().map(|e| e.name.clone()))
            .collect()
    }
}
