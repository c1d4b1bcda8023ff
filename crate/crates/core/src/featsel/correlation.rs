//! Pearson and Spearman correlation, and two-step correlation reduction.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::fractional_ranks;

use super::{SelectionMethod, SelectionResult};

/// Pearson correlation coefficient of two equal-length columns.
pub fn pearson_corr(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "columns differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::UndefinedMetric("correlation needs at least two values".into()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedMetric("correlation of a zero-variance column".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman_corr(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "columns differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    pearson_corr(&fractional_ranks(a), &fractional_ranks(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationFlavor {
    Pearson,
    Spearman,
}

/// Correlation over the rows where both values are present; undefined
/// correlations count as 0.
fn complete_corr(a: &[f64], b: &[f64]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .filter(|(u, v)| !u.is_nan() && !v.is_nan())
        .map(|(u, v)| (*u, *v))
        .unzip();
    pearson_corr(&x, &y).unwrap_or(0.0)
}

/// Drops the weaker member (by absolute target correlation) of every feature
/// pair correlated above `pair_threshold`, then keeps the `n_select`
/// survivors most correlated with the labels.
///
/// Pairs are visited in index order and skipped once either member has
/// been dropped. Equal target correlations drop the higher index. If fewer
/// than `n_select` features survive, the best dropped features fill the
/// remainder.
pub fn correlation_reduce(
    features: &Matrix,
    labels: &[u8],
    flavor: CorrelationFlavor,
    pair_threshold: f64,
    n_select: usize,
) -> Result<SelectionResult> {
    if !(pair_threshold > 0.0 && pair_threshold < 1.0) {
        return Err(Error::Argument(format!(
            "pair threshold {pair_threshold} outside (0, 1)"
        )));
    }
    let p = features.n_cols();
    if n_select > p {
        return Err(Error::Argument(format!("cannot select {n_select} of {p} features")));
    }
    if labels.len() != features.n_rows() {
        return Err(Error::Schema(format!(
            "{} labels for {} rows",
            labels.len(),
            features.n_rows()
        )));
    }
    // Spearman works on ranks throughout; missing values keep their NaN.
    let prepared: Vec<Vec<f64>> = features
        .columns()
        .iter()
        .map(|c| match flavor {
            CorrelationFlavor::Pearson => c.clone(),
            CorrelationFlavor::Spearman => rank_present(c),
        })
        .collect();
    let y: Vec<f64> = labels.iter().map(|&v| f64::from(v)).collect();
    let y = match flavor {
        CorrelationFlavor::Pearson => y,
        CorrelationFlavor::Spearman => fractional_ranks(&y),
    };
    let target: Vec<f64> = prepared.iter().map(|c| complete_corr(c, &y).abs()).collect();

    let mut dropped = vec![false; p];
    for a in 0..p {
        for b in (a + 1)..p {
            if dropped[a] || dropped[b] {
                continue;
            }
            if complete_corr(&prepared[a], &prepared[b]).abs() > pair_threshold {
                let loser = if target[a] < target[b] { a } else { b };
                dropped[loser] = true;
            }
        }
    }

    let by_target = |set: Vec<usize>| {
        let mut v = set;
        v.sort_by(|&i, &j| target[j].total_cmp(&target[i]).then(i.cmp(&j)));
        v
    };
    let mut order = by_target((0..p).filter(|&j| !dropped[j]).collect());
    order.extend(by_target((0..p).filter(|&j| dropped[j]).collect()));
    let method = match flavor {
        CorrelationFlavor::Pearson => SelectionMethod::Pearson,
        CorrelationFlavor::Spearman => SelectionMethod::Spearman,
    };
    Ok(SelectionResult::from_order(method, &order, n_select, target))
}

fn rank_present(col: &[f64]) -> Vec<f64> {
    let present: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
    let ranks = fractional_ranks(&present);
    let mut it = ranks.into_iter();
    col.iter()
        .map(|v| {
            if v.is_nan() {
                f64::NAN
            } else {
                it.next().unwrap_or(f64::NAN)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_hand_cases() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson_corr(&a, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(pearson_corr(&a, &a).unwrap(), 1.0);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert_eq!(pearson_corr(&a, &neg).unwrap(), -1.0);
        assert!(matches!(pearson_corr(&a, &[1.0; 4]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn spearman_uses_average_ranks() {
        assert_eq!(spearman_corr(&[1.0, 2.0, 3.0], &[9.0, 4.0, 1.0]).unwrap(), -1.0);
        // ranks (1.5, 1.5, 3) vs (1, 2, 3): centered (-0.5, -0.5, 1) vs (-1, 0, 1)
        let expected = 1.5 / (1.5f64.sqrt() * 2f64.sqrt());
        let got = spearman_corr(&[1.0, 1.0, 2.0], &[3.0, 5.0, 9.0]).unwrap();
        assert!((got - expected).abs() < 1e-15);
        let a = [0.3, -1.2, 2.5, 0.9, 1.1];
        let cubed: Vec<f64> = a.iter().map(|v: &f64| v.powi(3) + 4.0).collect();
        assert!((spearman_corr(&a, &cubed).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicated_pair_loses_one_member() {
        let x0 = vec![0.1, 0.5, 0.2, 0.9, 0.7, 0.3, 0.8, 0.4];
        let x2 = vec![0.3, 0.1, -0.2, 0.4, -0.1, 0.2, 0.0, -0.3];
        let y = [0u8, 1, 0, 1, 1, 0, 1, 0];
        let m = Matrix::from_columns(vec![x0.clone(), x0, x2]).unwrap();
        let r = correlation_reduce(&m, &y, CorrelationFlavor::Pearson, 0.45, 2).unwrap();
        assert_eq!(r.selected.len(), 2);
        assert!(!(r.selected.contains(&0) && r.selected.contains(&1)));
        assert!(r.selected.contains(&2));
        assert!(correlation_reduce(&m, &y, CorrelationFlavor::Pearson, 1.0, 2).is_err());
    }
}
