use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featsel::SelectorConfig;
use crate::gbtree::BoostConfig;
use crate::nullimp::ImputerConfig;
use crate::synthdata::{preset, CatalogCounts, DatasetSpec, Experiment, Family, NullInjection};
use crate::tune::SearchSpace;

use super::Arm;

pub const DEFAULT_ITERATIONS: usize = 10;
pub const DEFAULT_TUNING_BUDGET: usize = 30;
pub const DEFAULT_MASTER_SEED: u64 = 2023;
pub const DEFAULT_VALIDATION_DATASETS: usize = 2;
/// Share of the tuning dataset used to fit candidate models; the rest
/// scores them.
pub const TUNING_TRAIN_SHARE: f64 = 0.75;

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

fn default_budget() -> usize {
    DEFAULT_TUNING_BUDGET
}

fn default_seed() -> u64 {
    DEFAULT_MASTER_SEED
}

fn default_validation() -> usize {
    DEFAULT_VALIDATION_DATASETS
}

/// Changes applied on top of the experiment's dataset preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetOverrides {
    pub n_rows: Option<usize>,
    pub n_noise_features: Option<usize>,
    pub n_segments: Option<usize>,
    pub pair_correlation: Option<f64>,
    pub null_features: Option<usize>,
    /// A rate of 0 turns null injection off.
    pub null_rate: Option<f64>,
}

/// Pre-built datasets (CSV files written by `Dataset::save`) used instead
/// of a synthetic catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalData {
    pub train: Vec<PathBuf>,
    pub validation: Vec<PathBuf>,
    pub tuning: PathBuf,
}

/// Settings of the fitted transformers shared by every arm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSettings {
    pub selector: SelectorConfig,
    pub imputer: ImputerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Synthetic family; required unless `data` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default)]
    pub dataset: DatasetOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<ExternalData>,
    /// Method ids; the control arm is moved (or added) to the front.
    pub methods: Vec<String>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_validation")]
    pub validation_datasets: usize,
    #[serde(default = "default_budget")]
    pub tuning_budget: usize,
    #[serde(default)]
    pub search_space: SearchSpace,
    /// Model settings outside the search space.
    #[serde(default)]
    pub base_model: BoostConfig,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Write every generated dataset as CSV next to its manifest.
    #[serde(default)]
    pub persist_datasets: bool,
    #[serde(default)]
    pub pipeline: PipelineSettings,
}

impl ExperimentConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(experiment: Experiment, family: Family, methods: &[&str], output_dir: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            family: Some(family),
            dataset: DatasetOverrides::default(),
            data: None,
            methods: methods.iter().map(|m| m.to_string()).collect(),
            iterations: DEFAULT_ITERATIONS,
            validation_datasets: DEFAULT_VALIDATION_DATASETS,
            tuning_budget: DEFAULT_TUNING_BUDGET,
            search_space: SearchSpace::default(),
            base_model: BoostConfig::default(),
            master_seed: DEFAULT_MASTER_SEED,
            output_dir: output_dir.into(),
            persist_datasets: false,
            pipeline: PipelineSettings::default(),
        }
    }

    /// Reads a JSON config. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut config: ExperimentConfig =
            serde_json::from_slice(&bytes).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.output_dir);
        if let Some(data) = &mut config.data {
            data.train.iter_mut().for_each(resolve);
            data.validation.iter_mut().for_each(resolve);
            resolve(&mut data.tuning);
        }
        Ok(config)
    }

    /// Arms in run order, control first.
    pub fn arms(&self) -> Result<Vec<Arm>> {
        let control = Arm::control(self.experiment);
        let mut arms = vec![control];
        for id in &self.methods {
            let arm = Arm::parse(self.experiment, id)?;
            if arms.contains(&arm) {
                if arm != control {
                    return Err(Error::Config(format!("method {id:?} listed twice")));
                }
            } else {
                arms.push(arm);
            }
        }
        Ok(arms)
    }

    /// The dataset spec all catalog datasets are built from.
    pub fn base_spec(&self) -> Result<DatasetSpec> {
        let family = self
            .family
            .ok_or_else(|| Error::Config("synthetic experiments need a family".into()))?;
        let mut spec = preset(self.experiment, family);
        let o = &self.dataset;
        if let Some(n) = o.n_rows {
            spec.n_rows = n;
        }
        if let Some(n) = o.n_noise_features {
            spec.n_noise_features = n;
        }
        if let Some(n) = o.n_segments {
            spec.n_segments = n;
        }
        if let Some(r) = o.pair_correlation {
            spec.pair_correlation = r;
        }
        if o.null_features.is_some() || o.null_rate.is_some() {
            let current = spec.null_inject.unwrap_or(NullInjection {
                feature_count: 3,
                rate: 0.5,
            });
            let inject = NullInjection {
                feature_count: o.null_features.unwrap_or(current.feature_count),
                rate: o.null_rate.unwrap_or(current.rate),
            };
            spec.null_inject = (inject.rate > 0.0 && inject.feature_count > 0).then_some(inject);
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn catalog_counts(&self) -> CatalogCounts {
        CatalogCounts {
            train: self.iterations,
            validation: self.validation_datasets,
            tuning: 1,
        }
    }

    /// Checks everything that can be checked without touching data.
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.iterations == 1 {
            log::warn!("a single iteration gives degenerate bands");
        }
        if self.tuning_budget == 0 {
            return Err(Error::Config("tuning budget must be at least 1".into()));
        }
        if self.validation_datasets == 0 {
            return Err(Error::Config("validation_datasets must be at least 1".into()));
        }
        self.arms()?;
        self.search_space.validate()?;
        self.base_model.validate()?;
        match &self.data {
            Some(data) => {
                if data.train.len() < self.iterations {
                    return Err(Error::Config(format!(
                        "{} iterations need as many training files, got {}",
                        self.iterations,
                        data.train.len()
                    )));
                }
                if data.validation.is_empty() {
                    return Err(Error::Config("at least one validation file is needed".into()));
                }
            }
            None => {
                self.base_spec()?;
            }
        }
        let s = &self.pipeline.selector;
        if !(s.pair_threshold > 0.0 && s.pair_threshold < 1.0) {
            return Err(Error::Config(format!(
                "pair_threshold {} outside (0, 1)",
                s.pair_threshold
            )));
        }
        if s.n_repeats == 0 || s.rfe_step == 0 {
            return Err(Error::Config("n_repeats and rfe_step must be at least 1".into()));
        }
        if s.lambda_grid.is_empty() {
            return Err(Error::Config("lambda_grid is empty".into()));
        }
        if self.pipeline.imputer.k == 0 {
            return Err(Error::Config("imputer k must be at least 1".into()));
        }
        s.boost.validate()
    }
}
