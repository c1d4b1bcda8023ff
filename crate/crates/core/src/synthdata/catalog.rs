//! Dataset catalogs: the per-experiment family presets and the seeded
//! train / validation / tuning collections built from them.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::derive_seed;

use super::{generate_dataset, DatasetSpec, Family, FunctionalForm, NullInjection, Variant, DEFAULT_ROWS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    FeatureSelection,
    CategoricalEncoding,
    NullImputation,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::FeatureSelection => "feature_selection",
            Experiment::CategoricalEncoding => "categorical_encoding",
            Experiment::NullImputation => "null_imputation",
        }
    }
}

/// Dataset layout used by `experiment` for `family`:
///
/// | experiment           | variant  | signal     | noise      | segments | nulls     |
/// |----------------------|----------|------------|------------|----------|-----------|
/// | null imputation      | base     | 10 / 5 / 10 | 5         | 5        | 3 at 50%  |
/// | categorical encoding | gated    | 10 / 5 / 10 | 5         | 3        | none      |
/// | feature selection    | grouped  | 30 / 15 / 30 | 25 / 10 / 25 | 0   | none      |
///
/// (counts listed as linear / GAM global / jumpy GAM local).
pub fn preset(experiment: Experiment, family: Family) -> DatasetSpec {
    let variant = match experiment {
        Experiment::NullImputation => Variant::Base,
        Experiment::CategoricalEncoding => Variant::CategoricalGated,
        Experiment::FeatureSelection => Variant::Grouped,
    };
    let form = FunctionalForm::new(family, variant);
    let n_noise_features = match (experiment, family) {
        (Experiment::FeatureSelection, Family::GamGlobal) => 10,
        (Experiment::FeatureSelection, _) => 25,
        _ => 5,
    };
    DatasetSpec {
        form,
        n_rows: DEFAULT_ROWS,
        n_signal_features: form.n_features(),
        n_noise_features,
        n_segments: match experiment {
            Experiment::NullImputation => 5,
            Experiment::CategoricalEncoding => 3,
            Experiment::FeatureSelection => 0,
        },
        pair_correlation: 0.5,
        null_inject: (experiment == Experiment::NullImputation).then_some(NullInjection {
            feature_count: 3,
            rate: 0.5,
        }),
        seed: 0,
        coefficient_seed: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogCounts {
    pub train: usize,
    pub validation: usize,
    pub tuning: usize,
}

impl CatalogCounts {
    /// 30 training, 3 validation and 3 tuning datasets per family.
    pub const FULL: CatalogCounts = CatalogCounts {
        train: 30,
        validation: 3,
        tuning: 3,
    };
    /// Scaled-down counts for workstation runs.
    pub const DESK: CatalogCounts = CatalogCounts {
        train: 10,
        validation: 2,
        tuning: 1,
    };
}

impl Default for CatalogCounts {
    fn default() -> Self {
        Self::DESK
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetRole {
    Train,
    Validation,
    Tuning,
}

impl DatasetRole {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetRole::Train => "train",
            DatasetRole::Validation => "validation",
            DatasetRole::Tuning => "tuning",
        }
    }
}

const MAX_COEFFICIENT_ATTEMPTS: u64 = 16;

/// Seeded collection of datasets that share one generating function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub experiment: Experiment,
    pub base: DatasetSpec,
    pub master_seed: u64,
    pub counts: CatalogCounts,
    pub coefficient_seed: u64,
    /// Coefficient draws rejected for class imbalance before this one.
    pub rejected_draws: u64,
}

impl Catalog {
    /// Picks the family's coefficient seed from `master_seed`. Draws whose
    /// probe dataset violates the class-balance range are skipped.
    pub fn new(experiment: Experiment, base: DatasetSpec, master_seed: u64, counts: CatalogCounts) -> Result<Self> {
        base.validate()?;
        let label = format!("coefficients/{}/{}", experiment.as_str(), base.form.family.as_str());
        for attempt in 0..MAX_COEFFICIENT_ATTEMPTS {
            let catalog = Catalog {
                experiment,
                base: base.clone(),
                master_seed,
                counts,
                coefficient_seed: derive_seed(master_seed, &label, attempt),
                rejected_draws: attempt,
            };
            match catalog.generate(DatasetRole::Tuning, 0) {
                Ok(_) => return Ok(catalog),
                Err(Error::Generation { rate }) => {
                    log::warn!("coefficient draw {attempt} gives class balance {rate:.3}, redrawing");
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::InvalidSpec(format!(
            "no balanced coefficient draw in {MAX_COEFFICIENT_ATTEMPTS} attempts"
        )))
    }

    pub fn family(&self) -> Family {
        self.base.form.family
    }

    pub fn spec(&self, role: DatasetRole, index: usize) -> DatasetSpec {
        let label = format!(
            "{}/{}/{}",
            self.experiment.as_str(),
            self.family().as_str(),
            role.as_str()
        );
        DatasetSpec {
            seed: derive_seed(self.master_seed, &label, index as u64),
            coefficient_seed: Some(self.coefficient_seed),
            ..self.base.clone()
        }
    }

    pub fn generate(&self, role: DatasetRole, index: usize) -> Result<Dataset> {
        generate_dataset(&self.spec(role, index))
    }
}
