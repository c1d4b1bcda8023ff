//! Loading and cleaning real tabular data into a [`Dataset`].

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{CategoricalColumn, Dataset, DatasetManifest, DroppedColumn, LABEL_COLUMN, PROBABILITY_COLUMN};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn default_max_null_rate() -> f64 {
    0.99
}

/// Which columns to keep and how to read the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleaningRules {
    pub target: String,
    /// Target values mapped to 1 (for loan data, e.g. "Charged Off").
    pub positive_labels: Vec<String>,
    /// Target values mapped to 0. When empty, every other non-missing value
    /// is 0; otherwise rows with an unlisted value are skipped.
    #[serde(default)]
    pub negative_labels: Vec<String>,
    /// Columns whose share of missing cells reaches this rate are dropped.
    #[serde(default = "default_max_null_rate")]
    pub max_null_rate: f64,
    #[serde(default)]
    pub identity_columns: Vec<String>,
    #[serde(default)]
    pub leakage_columns: Vec<String>,
}

impl CleaningRules {
    pub fn new(target: &str, positive_label: &str) -> Self {
        Self {
            target: target.to_string(),
            positive_labels: vec![positive_label.to_string()],
            negative_labels: Vec::new(),
            max_null_rate: default_max_null_rate(),
            identity_columns: Vec::new(),
            leakage_columns: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_null_rate > 0.0 && self.max_null_rate <= 1.0) {
            return Err(Error::Config(format!(
                "max_null_rate {} outside (0, 1]",
                self.max_null_rate
            )));
        }
        if self.positive_labels.is_empty() {
            return Err(Error::Config("positive_labels is empty".into()));
        }
        if let Some(v) = self.positive_labels.iter().find(|v| self.negative_labels.contains(v)) {
            return Err(Error::Config(format!(
                "target value {v:?} is both positive and negative"
            )));
        }
        Ok(())
    }
}

/// Placeholder category for missing categorical cells.
pub const MISSING_CATEGORY: &str = "NA";

fn is_missing(field: &str) -> bool {
    field.is_empty()
        || ["na", "n/a", "nan", "null", "none"]
            .iter()
            .any(|t| field.eq_ignore_ascii_case(t))
}

/// Reads a headed CSV and applies `rules`.
///
/// Numeric columns are those whose every present field parses as a finite
/// number; all other kept columns become categorical. Rows that cannot be
/// read, have the wrong field count, or carry a missing or unlisted target
/// are skipped and counted in the manifest.
pub fn ingest_csv(path: &Path, rules: &CleaningRules) -> Result<Dataset> {
    rules.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut seen = HashSet::new();
    if let Some(dup) = header.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(Error::Ingestion(format!("duplicate column {dup:?}")));
    }
    let target = header
        .iter()
        .position(|h| *h == rules.target)
        .ok_or_else(|| Error::Ingestion(format!("target column {:?} not found", rules.target)))?;
    for name in rules.identity_columns.iter().chain(&rules.leakage_columns) {
        if !header.contains(name) {
            log::warn!("listed column {name:?} is not in {}", path.display());
        }
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut labels = Vec::new();
    let mut skipped = 0usize;
    for record in reader.records() {
        let Ok(record) = record else {
            skipped += 1;
            continue;
        };
        if record.len() != header.len() {
            skipped += 1;
            continue;
        }
        let y = record[target].trim();
        let label = if rules.positive_labels.iter().any(|p| p == y) {
            1
        } else if is_missing(y) || !(rules.negative_labels.is_empty() || rules.negative_labels.iter().any(|n| n == y)) {
            skipped += 1;
            continue;
        } else {
            0
        };
        labels.push(label);
        rows.push(record.iter().map(|f| f.trim().to_string()).collect());
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} unreadable or unlabeled rows in {}", path.display());
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Ingestion(format!("{} has no usable rows", path.display())));
    }

    let mut feature_names = Vec::new();
    let mut numeric = Vec::new();
    let mut categorical = Vec::new();
    let mut dropped = Vec::new();
    for (k, name) in header.iter().enumerate() {
        if k == target {
            continue;
        }
        let drop = |reason: String| DroppedColumn {
            name: name.clone(),
            reason,
        };
        if rules.identity_columns.contains(name) {
            dropped.push(drop("identity".into()));
            continue;
        }
        if rules.leakage_columns.contains(name) {
            dropped.push(drop("leakage".into()));
            continue;
        }
        let nulls = rows.iter().filter(|r| is_missing(&r[k])).count();
        let rate = nulls as f64 / n as f64;
        if rate >= rules.max_null_rate {
            dropped.push(drop(format!("null rate {rate}")));
            continue;
        }
        if name == LABEL_COLUMN || name == PROBABILITY_COLUMN {
            return Err(Error::Ingestion(format!("column name {name:?} is reserved")));
        }
        let parsed: Option<Vec<f64>> = rows
            .iter()
            .map(|r| {
                if is_missing(&r[k]) {
                    Some(f64::NAN)
                } else {
                    r[k].parse::<f64>().ok().filter(|v| v.is_finite())
                }
            })
            .collect();
        match parsed {
            Some(values) => {
                feature_names.push(name.clone());
                numeric.push(values);
            }
            None => categorical.push(CategoricalColumn {
                name: name.clone(),
                values: rows
                    .iter()
                    .map(|r| {
                        if is_missing(&r[k]) {
                            MISSING_CATEGORY.to_string()
                        } else {
                            r[k].clone()
                        }
                    })
                    .collect(),
            }),
        }
    }

    let missing_mask: Vec<Vec<bool>> = numeric.iter().map(|c| c.iter().map(|v| v.is_nan()).collect()).collect();
    let features = if numeric.is_empty() {
        Matrix::empty(n)
    } else {
        Matrix::from_columns(numeric)?
    };
    let dataset = Dataset {
        noise_flags: vec![false; feature_names.len()],
        feature_names,
        features,
        missing_mask,
        categorical,
        labels,
        true_probability: None,
        manifest: DatasetManifest {
            dropped_columns: dropped,
            skipped_rows: skipped,
            ..DatasetManifest::default()
        },
    };
    dataset.validate()?;
    Ok(dataset)
}
