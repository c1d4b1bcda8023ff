//! Materialized tables and their on-disk form.
//!
//! A dataset persists as one CSV (numeric features, then categorical columns,
//! then `y` and `p_true`) plus a sidecar JSON manifest recording how it was
//! made. Missing cells are written as empty fields.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::synthdata::DatasetSpec;

pub const LABEL_COLUMN: &str = "y";
pub const PROBABILITY_COLUMN: &str = "p_true";
pub const SEGMENT_COLUMN: &str = "cat";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalColumn {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Numeric,
    Noise,
    Categorical,
    Label,
    TrueProbability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnInfo {
    pub name: String,
    pub role: ColumnRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub name: String,
    pub reason: String,
}

/// Provenance stored next to every persisted dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<DatasetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub columns: Vec<ColumnInfo>,
    #[serde(default)]
    pub noise_features: Vec<String>,
    #[serde(default)]
    pub missing_features: Vec<String>,
    /// One coefficient vector per segment, or a single shared vector.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent_center: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped_columns: Vec<DroppedColumn>,
    #[serde(default)]
    pub skipped_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    /// Numeric features; missing cells hold NaN.
    pub features: Matrix,
    /// Column-major, aligned with `features`. Authoritative for missingness.
    pub missing_mask: Vec<Vec<bool>>,
    pub noise_flags: Vec<bool>,
    pub categorical: Vec<CategoricalColumn>,
    pub labels: Vec<u8>,
    pub true_probability: Option<Vec<f64>>,
    pub manifest: DatasetManifest,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn signal_indices(&self) -> Vec<usize> {
        (0..self.n_features()).filter(|&j| !self.noise_flags[j]).collect()
    }

    pub fn noise_indices(&self) -> Vec<usize> {
        (0..self.n_features()).filter(|&j| self.noise_flags[j]).collect()
    }

    /// Segment ids of the synthetic `cat` column, when present.
    pub fn segments(&self) -> Option<Vec<u32>> {
        let col = self.categorical.iter().find(|c| c.name == SEGMENT_COLUMN)?;
        col.values.iter().map(|v| v.parse().ok()).collect()
    }

    pub fn class_balance(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().map(|&y| f64::from(y)).sum::<f64>() / self.labels.len() as f64
    }

    /// Checks the structural invariants tying the columns together.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_rows();
        let p = self.n_features();
        if self.features.n_rows() != n && p > 0 {
            return Err(Error::Schema(format!(
                "{} feature rows for {n} labels",
                self.features.n_rows()
            )));
        }
        if self.feature_names.len() != p || self.noise_flags.len() != p || self.missing_mask.len() != p {
            return Err(Error::Schema("feature metadata does not match feature count".into()));
        }
        for (j, mask) in self.missing_mask.iter().enumerate() {
            if mask.len() != n {
                return Err(Error::Schema(format!("mask column {j} has wrong length")));
            }
            for (i, &m) in mask.iter().enumerate() {
                if m != self.features.is_missing(i, j) {
                    return Err(Error::Schema(format!(
                        "mask disagrees with missing marker at ({i}, {j})"
                    )));
                }
            }
        }
        if self.labels.iter().any(|&y| y > 1) {
            return Err(Error::Schema("labels must be 0 or 1".into()));
        }
        for c in &self.categorical {
            if c.values.len() != n {
                return Err(Error::Schema(format!("categorical column {} has wrong length", c.name)));
            }
        }
        if let Some(p) = &self.true_probability {
            if p.len() != n {
                return Err(Error::Schema("true probability column has wrong length".into()));
            }
        }
        Ok(())
    }

    /// Row subset, keeping every column and the manifest.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(rows),
            missing_mask: self
                .missing_mask
                .iter()
                .map(|m| rows.iter().map(|&i| m[i]).collect())
                .collect(),
            noise_flags: self.noise_flags.clone(),
            categorical: self
                .categorical
                .iter()
                .map(|c| CategoricalColumn {
                    name: c.name.clone(),
                    values: rows.iter().map(|&i| c.values[i].clone()).collect(),
                })
                .collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            true_probability: self
                .true_probability
                .as_ref()
                .map(|p| rows.iter().map(|&i| p[i]).collect()),
            manifest: self.manifest.clone(),
        }
    }

    fn column_infos(&self) -> Vec<ColumnInfo> {
        let mut cols: Vec<ColumnInfo> = self
            .feature_names
            .iter()
            .zip(&self.noise_flags)
            .map(|(name, &noise)| ColumnInfo {
                name: name.clone(),
                role: if noise { ColumnRole::Noise } else { ColumnRole::Numeric },
            })
            .collect();
        cols.extend(self.categorical.iter().map(|c| ColumnInfo {
            name: c.name.clone(),
            role: ColumnRole::Categorical,
        }));
        cols.push(ColumnInfo {
            name: LABEL_COLUMN.into(),
            role: ColumnRole::Label,
        });
        if self.true_probability.is_some() {
            cols.push(ColumnInfo {
                name: PROBABILITY_COLUMN.into(),
                role: ColumnRole::TrueProbability,
            });
        }
        cols
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`, returning both paths.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        write_atomic(&csv_path, &buf)?;
        write_atomic(&json_path, &serde_json::to_vec_pretty(&self.full_manifest())?)?;
        Ok((csv_path, json_path))
    }

    pub fn full_manifest(&self) -> DatasetManifest {
        let mut manifest = self.manifest.clone();
        manifest.columns = self.column_infos();
        manifest.noise_features = self
            .feature_names
            .iter()
            .zip(&self.noise_flags)
            .filter(|(_, &n)| n)
            .map(|(name, _)| name.clone())
            .collect();
        manifest
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = self.column_infos().into_iter().map(|c| c.name).collect();
        w.write_record(&header)?;
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for i in 0..self.n_rows() {
            record.clear();
            for j in 0..self.n_features() {
                if self.missing_mask[j][i] {
                    record.push(String::new());
                } else {
                    record.push(format!("{}", self.features.get(i, j)));
                }
            }
            for c in &self.categorical {
                record.push(c.values[i].clone());
            }
            record.push(self.labels[i].to_string());
            if let Some(p) = &self.true_probability {
                record.push(format!("{}", p[i]));
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads a dataset written by [`Dataset::save`].
    pub fn load(csv_path: &Path) -> Result<Dataset> {
        let json_path = csv_path.with_extension("json");
        let manifest: DatasetManifest =
            serde_json::from_slice(&fs::read(&json_path).map_err(|e| Error::io(&json_path, e))?)?;
        let mut reader = csv::Reader::from_path(csv_path)?;
        let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
        let role_of = |name: &str| {
            manifest
                .columns
                .iter()
                .find(|c| c.name == name)
                .map(|c| c.role)
                .ok_or_else(|| Error::Schema(format!("column {name} missing from manifest")))
        };
        let roles: Vec<ColumnRole> = header.iter().map(|h| role_of(h)).collect::<Result<_>>()?;

        let numeric: Vec<usize> = (0..header.len())
            .filter(|&k| matches!(roles[k], ColumnRole::Numeric | ColumnRole::Noise))
            .collect();
        let categorical: Vec<usize> = (0..header.len())
            .filter(|&k| roles[k] == ColumnRole::Categorical)
            .collect();
        let label = roles
            .iter()
            .position(|&r| r == ColumnRole::Label)
            .ok_or_else(|| Error::Schema("no label column".into()))?;
        let prob = roles.iter().position(|&r| r == ColumnRole::TrueProbability);

        let mut columns = vec![Vec::new(); numeric.len()];
        let mut cats = vec![Vec::new(); categorical.len()];
        let mut labels = Vec::new();
        let mut probs = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            for (col, &k) in columns.iter_mut().zip(&numeric) {
                let field = &record[k];
                col.push(if field.is_empty() {
                    f64::NAN
                } else {
                    field
                        .parse()
                        .map_err(|_| Error::Schema(format!("row {line}: cannot parse {field:?} as a number")))?
                });
            }
            for (col, &k) in cats.iter_mut().zip(&categorical) {
                col.push(record[k].to_string());
            }
            labels.push(match &record[label] {
                "0" => 0,
                "1" => 1,
                other => return Err(Error::Schema(format!("row {line}: bad label {other:?}"))),
            });
            if let Some(k) = prob {
                probs.push(
                    record[k]
                        .parse()
                        .map_err(|_| Error::Schema(format!("row {line}: bad probability {:?}", &record[k])))?,
                );
            }
        }
        let missing_mask = columns.iter().map(|c| c.iter().map(|v| v.is_nan()).collect()).collect();
        let features = if columns.is_empty() {
            Matrix::empty(labels.len())
        } else {
            Matrix::from_columns(columns)?
        };
        let dataset = Dataset {
            feature_names: numeric.iter().map(|&k| header[k].clone()).collect(),
            noise_flags: numeric.iter().map(|&k| roles[k] == ColumnRole::Noise).collect(),
            features,
            missing_mask,
            categorical: categorical
                .iter()
                .zip(cats)
                .map(|(&k, values)| CategoricalColumn {
                    name: header[k].clone(),
                    values,
                })
                .collect(),
            labels,
            true_probability: prob.map(|_| probs),
            manifest,
        };
        dataset.validate()?;
        Ok(dataset)
    }
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
