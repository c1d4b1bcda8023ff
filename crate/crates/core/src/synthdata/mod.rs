//! Synthetic data families with known generating probabilities.
//!
//! A [`DatasetSpec`] fully determines a [`Dataset`]: generation assigns the
//! functional form, draws coefficients, samples correlated normal features,
//! and draws Bernoulli labels from the sigmoid of the median-centered latent
//! score. Noise columns, segments and missing cells are layered on top.
//!
//! Randomness is split into labelled streams. Coefficients (and the choice of
//! which features get nulled) come from `coefficient_seed`, everything else
//! from `seed`, so datasets that share a coefficient seed share one
//! generating function and differ only in their draws.

mod catalog;
mod forms;
mod sampling;

use serde::{Deserialize, Serialize};

use crate::dataset::{CategoricalColumn, Dataset, DatasetManifest, SEGMENT_COLUMN};
use crate::error::{Error, Result};
use crate::metrics;
use crate::rng;

pub use catalog::{preset, Catalog, CatalogCounts, DatasetRole, Experiment};
pub use forms::{eval_form, eval_row, eval_segmented, terms, Family, FunctionalForm, Variant};
pub use sampling::{
    add_noise_features, assign_segments, build_covariance, choose_missing_features, draw_coefficients, inject_missing,
    mask_cells, sample_features, sample_labels, to_probability, COEFFICIENT_BOUND,
};

pub(crate) use sampling::median; // shared with imputers

/// Weights β₁..βₙ of a functional form, each in [−3, 3].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientSet(Vec<f64>);

impl CoefficientSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values
            .iter()
            .find(|v| !(-COEFFICIENT_BOUND..=COEFFICIENT_BOUND).contains(*v))
        {
            return Err(Error::InvalidSpec(format!("coefficient {v} outside [-3, 3]")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullInjection {
    pub feature_count: usize,
    pub rate: f64,
}

fn default_correlation() -> f64 {
    0.5
}

/// Declarative recipe for one synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub form: FunctionalForm,
    pub n_rows: usize,
    pub n_signal_features: usize,
    pub n_noise_features: usize,
    /// 0 means no categorical column.
    #[serde(default)]
    pub n_segments: usize,
    #[serde(default = "default_correlation")]
    pub pair_correlation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_inject: Option<NullInjection>,
    pub seed: u64,
    /// Seed of the generating function; defaults to `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_seed: Option<u64>,
}

/// Desk-scale row count; the original study used 250,000.
pub const DEFAULT_ROWS: usize = 20_000;

impl DatasetSpec {
    pub fn coefficient_seed(&self) -> u64 {
        self.coefficient_seed.unwrap_or(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 {
            return Err(Error::InvalidSpec("n_rows must be positive".into()));
        }
        if self.n_signal_features != self.form.n_features() {
            return Err(Error::InvalidSpec(format!(
                "{:?}/{:?} needs {} signal features, spec has {}",
                self.form.family,
                self.form.variant,
                self.form.n_features(),
                self.n_signal_features
            )));
        }
        if !(0.0..1.0).contains(&self.pair_correlation) {
            return Err(Error::InvalidSpec(format!(
                "pair correlation {} outside [0, 1)",
                self.pair_correlation
            )));
        }
        if self.form.variant == Variant::CategoricalGated && self.n_segments < 3 {
            return Err(Error::InvalidSpec(
                "categorical-gated forms need at least three segments".into(),
            ));
        }
        if let Some(inject) = self.null_inject {
            if inject.feature_count > self.n_signal_features {
                return Err(Error::InvalidSpec(format!(
                    "cannot null {} of {} signal features",
                    inject.feature_count, self.n_signal_features
                )));
            }
            if !(0.0..=1.0).contains(&inject.rate) {
                return Err(Error::InvalidSpec(format!("null rate {} outside [0, 1]", inject.rate)));
            }
        }
        Ok(())
    }
}

/// Accepted range for the share of positive labels.
pub const BALANCE_RANGE: (f64, f64) = (0.4, 0.6);

/// Coefficient sets of the generating function: one per segment for base
/// forms with a categorical column, otherwise a single set.
pub fn generating_coefficients(spec: &DatasetSpec) -> Result<Vec<CoefficientSet>> {
    let mut rng = rng::stream(spec.coefficient_seed(), "coefficients", 0);
    let sets = if spec.form.variant == Variant::Base && spec.n_segments > 0 {
        spec.n_segments
    } else {
        1
    };
    (0..sets)
        .map(|_| draw_coefficients(spec.form.n_coefficients(), &mut rng))
        .collect()
}

/// Materializes a dataset from its spec. Pure function of the spec.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let coefficients = generating_coefficients(spec)?;

    let sigma = build_covariance(spec.n_signal_features, spec.pair_correlation)?;
    let mut features = sample_features(spec.n_rows, &sigma, &mut rng::stream(spec.seed, "features", 0))?;

    let segments = if spec.n_segments > 0 {
        Some(assign_segments(
            spec.n_rows,
            spec.n_segments,
            &mut rng::stream(spec.seed, "segments", 0),
        )?)
    } else {
        None
    };

    let latent = match (&segments, spec.form.variant) {
        (Some(seg), Variant::Base) => eval_segmented(spec.form, &coefficients, &features, seg)?,
        (seg, _) => eval_form(spec.form, &coefficients[0], &features, seg.as_deref())?,
    };
    let (probs, center) = to_probability(&latent)?;
    let labels = sample_labels(&probs, &mut rng::stream(spec.seed, "labels", 0))?;

    add_noise_features(
        &mut features,
        spec.n_noise_features,
        &mut rng::stream(spec.seed, "noise", 0),
    );

    let p = features.n_cols();
    let mut feature_names: Vec<String> = (1..=spec.n_signal_features).map(|j| format!("x{j}")).collect();
    feature_names.extend((1..=spec.n_noise_features).map(|j| format!("noise{j}")));
    let mut dataset = Dataset {
        feature_names,
        missing_mask: vec![vec![false; spec.n_rows]; p],
        noise_flags: (0..p).map(|j| j >= spec.n_signal_features).collect(),
        features,
        categorical: segments
            .map(|seg| {
                vec![CategoricalColumn {
                    name: SEGMENT_COLUMN.into(),
                    values: seg.iter().map(u32::to_string).collect(),
                }]
            })
            .unwrap_or_default(),
        labels,
        true_probability: Some(probs),
        manifest: DatasetManifest {
            spec: Some(spec.clone()),
            seed: Some(spec.seed),
            coefficients: coefficients.iter().map(|c| c.values().to_vec()).collect(),
            latent_center: Some(center),
            ..Default::default()
        },
    };

    if let Some(inject) = spec.null_inject {
        let chosen = choose_missing_features(
            &dataset,
            inject.feature_count,
            &mut rng::stream(spec.coefficient_seed(), "missing_features", 0),
        )?;
        mask_cells(
            &mut dataset,
            &chosen,
            inject.rate,
            &mut rng::stream(spec.seed, "missing_cells", 0),
        )?;
    }

    let rate = dataset.class_balance();
    if !(BALANCE_RANGE.0..=BALANCE_RANGE.1).contains(&rate) {
        return Err(Error::Generation { rate });
    }
    Ok(dataset)
}

/// AUC of the generating probabilities against the drawn labels: the ceiling
/// any model can reach in expectation.
pub fn oracle_auc(true_probability: &[f64], labels: &[u8]) -> Result<f64> {
    metrics::auc(true_probability, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: Experiment, family: Family) -> DatasetSpec {
        let mut spec = preset(experiment, family);
        spec.n_rows = 2_000;
        spec.seed = 17;
        spec
    }

    #[test]
    fn feature_selection_layout() {
        let d = generate_dataset(&small(Experiment::FeatureSelection, Family::Linear)).unwrap();
        assert_eq!(d.n_features(), 55);
        assert_eq!(d.signal_indices().len(), 30);
        assert_eq!(d.noise_indices().len(), 25);
        assert!(d.categorical.is_empty());
        d.validate().unwrap();
    }

    #[test]
    fn categorical_encoding_has_three_segments() {
        let d = generate_dataset(&small(Experiment::CategoricalEncoding, Family::GamGlobal)).unwrap();
        let mut seg = d.segments().unwrap();
        seg.sort_unstable();
        seg.dedup();
        assert_eq!(seg, vec![1, 2, 3]);
        assert_eq!(d.n_features(), 10);
    }

    #[test]
    fn null_imputation_layout() {
        let d = generate_dataset(&small(Experiment::NullImputation, Family::Linear)).unwrap();
        assert_eq!(d.n_features(), 15);
        assert_eq!(d.manifest.coefficients.len(), 5);
        assert_eq!(d.manifest.missing_features.len(), 3);
        for name in &d.manifest.missing_features {
            assert!(name.starts_with('x'));
        }
        d.validate().unwrap();
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = small(Experiment::NullImputation, Family::JumpyGamLocal);
        let a = generate_dataset(&spec).unwrap();
        let b = generate_dataset(&spec).unwrap();
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        a.write_csv(&mut ba).unwrap();
        b.write_csv(&mut bb).unwrap();
        assert_eq!(ba, bb);
    }

    #[test]
    fn shared_coefficient_seed_shares_the_function() {
        let mut a = small(Experiment::FeatureSelection, Family::GamGlobal);
        a.coefficient_seed = Some(5);
        let mut b = a.clone();
        b.seed = 99;
        let da = generate_dataset(&a).unwrap();
        let db = generate_dataset(&b).unwrap();
        assert_eq!(da.manifest.coefficients, db.manifest.coefficients);
        assert_ne!(da.labels, db.labels);
    }

    #[test]
    fn oracle_auc_cases() {
        assert_eq!(oracle_auc(&[0.1, 0.2, 0.9], &[0, 0, 1]).unwrap(), 1.0);
        assert_eq!(oracle_auc(&[0.5; 4], &[0, 1, 0, 1]).unwrap(), 0.5);
        let p = [0.9, 0.3, 0.6, 0.6, 0.2, 0.8];
        let y = [1, 0, 0, 1, 1, 0];
        // pairs (pos, neg): pos = {0.9, 0.6, 0.2}, neg = {0.3, 0.6, 0.8}
        // 0.9: 3 wins; 0.6: 1 win + 1 tie; 0.2: 0 -> 4.5 / 9
        assert_eq!(oracle_auc(&p, &y).unwrap(), 0.5);
        assert!(matches!(
            oracle_auc(&[0.3, 0.4], &[1, 1]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = small(Experiment::FeatureSelection, Family::Linear);
        spec.n_signal_features = 10;
        assert!(matches!(generate_dataset(&spec), Err(Error::InvalidSpec(_))));
        let mut spec = small(Experiment::CategoricalEncoding, Family::Linear);
        spec.n_segments = 2;
        assert!(generate_dataset(&spec).is_err());
        let mut spec = small(Experiment::NullImputation, Family::GamGlobal);
        spec.null_inject = Some(NullInjection {
            feature_count: 6,
            rate: 0.5,
        });
        assert!(generate_dataset(&spec).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = small(Experiment::NullImputation, Family::Linear);
        let text = serde_json::to_string(&spec).unwrap();
        let back: DatasetSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }
}
