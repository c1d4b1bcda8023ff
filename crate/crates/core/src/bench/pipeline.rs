//! Standard preprocessing with one stage swapped per arm.
//!
//! Order: align validation columns to training, standardize numeric
//! columns, impute (null-imputation arms only), encode categorical columns
//! (appended after the numeric block), select features (feature-selection
//! arms only). Every transformer is fitted on training rows.

use serde::{Deserialize, Serialize};

use crate::catenc::{EncoderState, EncodingMethod};
use crate::dataset::{CategoricalColumn, Dataset};
use crate::error::{Error, Result};
use crate::featsel::{select, SelectionResult};
use crate::matrix::Matrix;
use crate::nullimp::{ImputerConfig, ImputerState};
use crate::standardize::Standardizer;

use super::{Arm, PipelineSettings};

/// Everything fitted while preparing one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmManifest {
    pub standardizer: Standardizer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imputer: Option<ImputerState>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub encoders: Vec<EncoderState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionResult>,
    /// Columns offered to the selector (all processed columns).
    pub candidate_columns: Vec<String>,
    /// Columns the model is trained on.
    pub columns: Vec<String>,
    /// Validation rows holding a category unseen in training.
    #[serde(default)]
    pub unseen_categories: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub train: Matrix,
    pub validation: Matrix,
    pub manifest: ArmManifest,
}

fn position(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::Schema(format!("validation data lacks {what} column {name:?}")))
}

/// Validation numeric and categorical columns in training order.
fn align<'a>(train: &Dataset, validation: &'a Dataset) -> Result<(Matrix, Vec<&'a CategoricalColumn>)> {
    let idx: Vec<usize> = train
        .feature_names
        .iter()
        .map(|n| position(&validation.feature_names, n, "numeric"))
        .collect::<Result<_>>()?;
    let numeric = if idx.is_empty() {
        Matrix::empty(validation.n_rows())
    } else {
        validation.features.select_columns(&idx)
    };
    let cat_names: Vec<String> = validation.categorical.iter().map(|c| c.name.clone()).collect();
    let cats = train
        .categorical
        .iter()
        .map(|c| position(&cat_names, &c.name, "categorical").map(|k| &validation.categorical[k]))
        .collect::<Result<_>>()?;
    Ok((numeric, cats))
}

/// Default number of features to keep: the signal features plus any
/// encoded columns.
fn default_n_select(train: &Dataset, n_columns: usize) -> usize {
    let encoded = n_columns - train.n_features();
    train.signal_indices().len() + encoded
}

/// Fits the arm's pipeline on `train` and applies it to both tables.
pub fn prepare(
    arm: Arm,
    train: &Dataset,
    validation: &Dataset,
    settings: &PipelineSettings,
    seed: u64,
) -> Result<Prepared> {
    train.validate()?;
    validation.validate()?;
    let (val_numeric, val_cats) = align(train, validation)?;

    let standardizer = Standardizer::fit(&train.features);
    let mut tr = standardizer.transform(&train.features)?;
    let mut va = standardizer.transform(&val_numeric)?;
    let mut names = train.feature_names.clone();

    let mut imputer = None;
    if let Arm::Impute(method) = arm {
        let config = ImputerConfig {
            seed,
            ..settings.imputer
        };
        let state = ImputerState::fit(method, &tr, Some(&train.labels), &config)?;
        tr = state.transform(&tr)?;
        va = state.transform(&va)?;
        names = state.output_names(&names);
        imputer = Some(state);
    }

    let encoding = match arm {
        Arm::Encode(m) => m,
        _ => EncodingMethod::OneHot,
    };
    let mut encoders = Vec::new();
    let mut unseen_categories = 0;
    for (col, vcol) in train.categorical.iter().zip(val_cats) {
        let encoder = EncoderState::fit(encoding, &col.name, &col.values)?;
        let a = encoder.transform(&col.values);
        let b = encoder.transform(&vcol.values);
        unseen_categories += b.unseen_rows.len();
        tr = tr.hstack(&a.columns)?;
        va = va.hstack(&b.columns)?;
        names.extend(a.names);
        encoders.push(encoder);
    }

    let candidate_columns = names.clone();
    let mut selection = None;
    if let Arm::Select(method) = arm {
        let p = tr.n_cols();
        let n = settings
            .selector
            .n_select
            .unwrap_or_else(|| default_n_select(train, p))
            .min(p);
        let result = select(method, &tr, &train.labels, n, &settings.selector, seed)?;
        let mut keep = result.selected.clone();
        if keep.is_empty() {
            return Err(Error::Fit(format!("{method} kept no features")));
        }
        keep.sort_unstable();
        tr = tr.select_columns(&keep);
        va = va.select_columns(&keep);
        names = keep.iter().map(|&j| candidate_columns[j].clone()).collect();
        selection = Some(result);
    }
    if tr.n_cols() == 0 {
        return Err(Error::Schema("no model input columns".into()));
    }

    Ok(Prepared {
        train: tr,
        validation: va,
        manifest: ArmManifest {
            standardizer,
            imputer,
            encoders,
            selection,
            candidate_columns,
            columns: names,
            unseen_categories,
        },
    })
}
