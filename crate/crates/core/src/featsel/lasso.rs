//! L1-penalized least squares on the binary target, solved by cyclic
//! coordinate descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::standardize::Standardizer;

use super::{SelectionMethod, SelectionResult};

pub const MAX_SWEEPS: usize = 10_000;
pub const TOLERANCE: f64 = 1e-6;
const STANDARD_TOLERANCE: f64 = 1e-6;

/// Penalties per observation; each fit multiplies by its row count.
pub const DEFAULT_LAMBDA_GRID: [f64; 7] = [2e-4, 6e-4, 2e-3, 6e-3, 2e-2, 6e-2, 0.2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
}

impl LassoFit {
    pub fn predict(&self, features: &Matrix) -> Vec<f64> {
        let mut out = vec![self.intercept; features.n_rows()];
        for (col, b) in features.columns().iter().zip(&self.coefficients) {
            if *b != 0.0 {
                for (o, x) in out.iter_mut().zip(col) {
                    *o += b * x;
                }
            }
        }
        out
    }
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn check_standardized(features: &Matrix) -> Result<()> {
    let n = features.n_rows() as f64;
    for (j, col) in features.columns().iter().enumerate() {
        let mean = col.iter().sum::<f64>() / n;
        let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if !(mean.abs() <= STANDARD_TOLERANCE && (std - 1.0).abs() <= STANDARD_TOLERANCE) {
            return Err(Error::Precondition(format!(
                "column {j} is not standardized (mean {mean:.3e}, std {std:.6})"
            )));
        }
    }
    Ok(())
}

/// Minimizes Σ(yᵢ − b₀ − Σⱼ xᵢⱼβⱼ)² + λ·Σ|βⱼ| over standardized features.
/// The unpenalized intercept b₀ equals the label mean.
pub fn lasso_fit(features: &Matrix, labels: &[u8], lambda: f64) -> Result<LassoFit> {
    lasso_fit_from(features, labels, lambda, None)
}

fn lasso_fit_from(features: &Matrix, labels: &[u8], lambda: f64, warm: Option<&[f64]>) -> Result<LassoFit> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(format!(
            "lambda {lambda} must be finite and non-negative"
        )));
    }
    if labels.len() != features.n_rows() || labels.is_empty() {
        return Err(Error::Schema(format!(
            "{} labels for {} rows",
            labels.len(),
            features.n_rows()
        )));
    }
    check_standardized(features)?;
    let n = labels.len();
    let p = features.n_cols();
    let intercept = labels.iter().map(|&y| f64::from(y)).sum::<f64>() / n as f64;
    let mut beta = warm.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let mut residual: Vec<f64> = labels.iter().map(|&y| f64::from(y) - intercept).collect();
    for (col, b) in features.columns().iter().zip(&beta) {
        if *b != 0.0 {
            for (r, x) in residual.iter_mut().zip(col) {
                *r -= b * x;
            }
        }
    }
    let norms: Vec<f64> = features
        .columns()
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum())
        .collect();
    let half_lambda = lambda / 2.0;

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let col = features.column(j);
            let old = beta[j];
            let rho: f64 = col.iter().zip(&residual).map(|(x, r)| x * r).sum::<f64>() + norms[j] * old;
            let new = soft_threshold(rho, half_lambda) / norms[j];
            if new != old {
                let delta = new - old;
                for (r, x) in residual.iter_mut().zip(col) {
                    *r -= delta * x;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < TOLERANCE {
            break;
        }
    }
    Ok(LassoFit {
        intercept,
        coefficients: beta,
        sweeps,
    })
}

/// Cross-validated squared error per grid value (5 folds, row `i` in fold
/// `i % 5`), each fold standardized with its own training statistics.
pub fn lasso_cv_errors(features: &Matrix, labels: &[u8], lambda_grid: &[f64]) -> Result<Vec<f64>> {
    const FOLDS: usize = 5;
    let n = features.n_rows();
    if n < FOLDS * 2 {
        return Err(Error::Argument(format!(
            "{n} rows are too few for {FOLDS}-fold validation"
        )));
    }
    let mut errors = vec![0.0; lambda_grid.len()];
    for fold in 0..FOLDS {
        let train: Vec<usize> = (0..n).filter(|i| i % FOLDS != fold).collect();
        let held: Vec<usize> = (0..n).filter(|i| i % FOLDS == fold).collect();
        let (scaler, xt) = Standardizer::fit_transform(&features.select_rows(&train))?;
        let xt = drop_constant(xt, &scaler);
        let xh = drop_constant(scaler.transform(&features.select_rows(&held))?, &scaler);
        let yt: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
        let yh: Vec<u8> = held.iter().map(|&i| labels[i]).collect();
        // Largest penalty first so each fit warm-starts from a sparser one.
        let mut order: Vec<usize> = (0..lambda_grid.len()).collect();
        order.sort_by(|&a, &b| lambda_grid[b].total_cmp(&lambda_grid[a]));
        let mut warm: Option<Vec<f64>> = None;
        for k in order {
            let fit = lasso_fit_from(&xt, &yt, lambda_grid[k] * train.len() as f64, warm.as_deref())?;
            let pred = fit.predict(&xh);
            errors[k] += pred
                .iter()
                .zip(&yh)
                .map(|(p, &y)| (p - f64::from(y)).powi(2))
                .sum::<f64>()
                / n as f64;
            warm = Some(fit.coefficients);
        }
    }
    Ok(errors)
}

/// Zeroes constant columns, which standardization leaves untouched, so the
/// solver's precondition holds; their coefficients then stay at zero.
fn drop_constant(mut m: Matrix, scaler: &Standardizer) -> Matrix {
    for (j, s) in scaler.stds.iter().enumerate() {
        if s.is_none() {
            m.column_mut(j).iter_mut().for_each(|v| *v = 0.0);
        }
    }
    m
}

/// Picks λ by 5-fold cross-validated squared error and selects every
/// feature with a nonzero coefficient, ordered by absolute coefficient.
pub fn lasso_select(features: &Matrix, labels: &[u8], lambda_grid: &[f64]) -> Result<SelectionResult> {
    if lambda_grid.is_empty() {
        return Err(Error::Argument("empty lambda grid".into()));
    }
    if let Some(bad) = lambda_grid.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::Argument(format!("invalid lambda {bad}")));
    }
    if features.count_missing() > 0 {
        return Err(Error::Precondition("LASSO selection needs complete features".into()));
    }
    let errors = lasso_cv_errors(features, labels, lambda_grid)?;
    let mut best = 0;
    for k in 1..errors.len() {
        if errors[k] < errors[best] {
            best = k;
        }
    }
    let (scaler, x) = Standardizer::fit_transform(features)?;
    let x = drop_constant(x, &scaler);
    let fit = lasso_fit(&x, labels, lambda_grid[best] * features.n_rows() as f64)?;
    let scores: Vec<f64> = fit.coefficients.iter().map(|b| b.abs()).collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    let n_nonzero = scores.iter().filter(|s| **s > 0.0).count();
    let mut result = SelectionResult::from_order(SelectionMethod::Lasso, &order, n_nonzero, scores);
    result.lambda = Some(lambda_grid[best]);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_spd;
    use rand::Rng;

    fn random_standardized(n: usize, p: usize, seed: u64) -> (Matrix, Vec<u8>) {
        let mut rng = crate::rng::from_seed(seed);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let raw = Matrix::from_columns(cols).unwrap();
        let labels: Vec<u8> = (0..n)
            .map(|i| u8::from(raw.get(i, 0) - 0.5 * raw.get(i, 1) + rng.gen_range(-0.5..0.5) > 0.0))
            .collect();
        (Standardizer::fit_transform(&raw).unwrap().1, labels)
    }

    #[test]
    fn zero_penalty_matches_normal_equations() {
        let (x, y) = random_standardized(60, 4, 11);
        let fit = lasso_fit(&x, &y, 0.0).unwrap();
        // normal equations on centered y
        let ybar = y.iter().map(|&v| f64::from(v)).sum::<f64>() / 60.0;
        let xtx: Vec<Vec<f64>> = (0..4)
            .map(|a| {
                (0..4)
                    .map(|b| x.column(a).iter().zip(x.column(b)).map(|(u, v)| u * v).sum())
                    .collect()
            })
            .collect();
        let xty: Vec<f64> = (0..4)
            .map(|a| {
                x.column(a)
                    .iter()
                    .zip(&y)
                    .map(|(u, &v)| u * (f64::from(v) - ybar))
                    .sum()
            })
            .collect();
        let beta = solve_spd(&xtx, &xty).unwrap();
        for (b, o) in fit.coefficients.iter().zip(&beta) {
            assert!((b - o).abs() < 1e-6, "{b} vs {o}");
        }
    }

    #[test]
    fn large_penalty_zeroes_everything() {
        let (x, y) = random_standardized(50, 3, 12);
        let fit = lasso_fit(&x, &y, 1e9).unwrap();
        assert!(fit.coefficients.iter().all(|b| *b == 0.0));
    }

    #[test]
    fn noise_feature_hits_exact_zero_below_threshold() {
        let (x, y) = random_standardized(400, 3, 13);
        // Column 2 is pure noise; at a penalty above twice its correlation
        // with the partial residual it must be exactly zero.
        let fit = lasso_fit(&x, &y, 0.2 * 400.0).unwrap();
        let partial: Vec<f64> = {
            let mut r: Vec<f64> = y.iter().map(|&v| f64::from(v) - fit.intercept).collect();
            for j in 0..2 {
                for (ri, xi) in r.iter_mut().zip(x.column(j)) {
                    *ri -= fit.coefficients[j] * xi;
                }
            }
            r
        };
        let rho: f64 = x.column(2).iter().zip(&partial).map(|(a, b)| a * b).sum();
        assert!(rho.abs() <= 0.1 * 400.0);
        assert_eq!(fit.coefficients[2], 0.0);
        assert!(fit.coefficients[0] > 0.0);
    }

    #[test]
    fn rejects_unstandardized_input() {
        let x = Matrix::from_columns(vec![vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(lasso_fit(&x, &[0, 1, 1], 0.1), Err(Error::Precondition(_))));
        assert!(lasso_select(&x, &[0, 1, 1], &[]).is_err());
    }
}
