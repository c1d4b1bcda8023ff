//! Column standardization fitted on training rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Per-column training mean and population standard deviation. Missing
/// values are ignored when fitting and stay missing when transforming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// `None` for columns with zero (or undefined) training variance, which
    /// pass through unchanged.
    pub stds: Vec<Option<f64>>,
}

impl Standardizer {
    pub fn fit(features: &Matrix) -> Self {
        let mut means = Vec::with_capacity(features.n_cols());
        let mut stds = Vec::with_capacity(features.n_cols());
        for (j, col) in features.columns().iter().enumerate() {
            let present: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
            let n = present.len() as f64;
            let mean = if present.is_empty() {
                0.0
            } else {
                present.iter().sum::<f64>() / n
            };
            let var = if present.is_empty() {
                0.0
            } else {
                present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
            };
            if var > 0.0 && var.is_finite() {
                means.push(mean);
                stds.push(Some(var.sqrt()));
            } else {
                log::warn!("column {j} has zero training variance; left unstandardized");
                means.push(mean);
                stds.push(None);
            }
        }
        Self { means, stds }
    }

    pub fn transform(&self, features: &Matrix) -> Result<Matrix> {
        if features.n_cols() != self.means.len() {
            return Err(Error::Schema(format!(
                "standardizer fitted on {} columns, got {}",
                self.means.len(),
                features.n_cols()
            )));
        }
        let cols = features
            .columns()
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(col, (m, s))| match s {
                Some(s) => col.iter().map(|v| (v - m) / s).collect(),
                None => col.clone(),
            })
            .collect::<Vec<Vec<f64>>>();
        if cols.is_empty() {
            return Ok(features.clone());
        }
        Matrix::from_columns(cols)
    }

    pub fn fit_transform(features: &Matrix) -> Result<(Self, Matrix)> {
        let s = Self::fit(features);
        let out = s.transform(features)?;
        Ok((s, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_columns_become_unit_scale() {
        let train = Matrix::from_columns(vec![vec![1.0, 2.0, 3.0, 10.0], vec![5.0; 4]]).unwrap();
        let (s, z) = Standardizer::fit_transform(&train).unwrap();
        let c = z.column(0);
        let mean = c.iter().sum::<f64>() / 4.0;
        let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var.sqrt() - 1.0).abs() < 1e-12);
        assert_eq!(z.column(1), &[5.0; 4]);
        // validation uses the training statistics
        let val = Matrix::from_columns(vec![vec![4.0, f64::NAN], vec![7.0, 5.0]]).unwrap();
        let v = s.transform(&val).unwrap();
        assert_eq!(v.get(0, 0), 0.0);
        assert!(v.get(1, 0).is_nan());
        assert_eq!(v.get(0, 1), 7.0);
    }
}
