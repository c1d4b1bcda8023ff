//! Selectors driven by the boosted tree model: importance averaging over
//! random splits, permutation importance, and recursive elimination.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gbtree::{fit, BoostConfig, ImportanceKind};
use crate::matrix::Matrix;
use crate::metrics::auc;
use crate::rng::stream;

use super::{SelectionMethod, SelectionResult};

pub const IMPORTANCE_REPETITIONS: usize = 5;
pub const IMPORTANCE_TRAIN_SHARE: f64 = 0.6;
/// Share of rows used to fit the permutation benchmark model; the rest
/// score the shuffles.
pub const PERMUTATION_TRAIN_SHARE: f64 = 0.7;

fn check_n(n_select: usize, p: usize) -> Result<()> {
    if n_select > p {
        return Err(Error::Argument(format!("cannot select {n_select} of {p} features")));
    }
    Ok(())
}

/// Row indices shuffled by `label` and split at `share`.
fn random_split(n: usize, share: f64, seed: u64, label: &str, index: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut stream(seed, label, index));
    let cut = ((n as f64) * share).round() as usize;
    let held = rows.split_off(cut.min(n));
    rows.sort_unstable();
    let mut held = held;
    held.sort_unstable();
    (rows, held)
}

fn take<T: Copy>(values: &[T], rows: &[usize]) -> Vec<T> {
    rows.iter().map(|&i| values[i]).collect()
}

/// Averages normalized gain or weight importances over five fits on random
/// 60% row samples and selects the top `n_select`.
pub fn xgb_importance_select(
    features: &Matrix,
    labels: &[u8],
    kind: ImportanceKind,
    n_select: usize,
    config: &BoostConfig,
    seed: u64,
) -> Result<SelectionResult> {
    let p = features.n_cols();
    check_n(n_select, p)?;
    let per_rep: Vec<Result<Vec<f64>>> = (0..IMPORTANCE_REPETITIONS)
        .into_par_iter()
        .map(|rep| {
            let (train, _) = random_split(
                features.n_rows(),
                IMPORTANCE_TRAIN_SHARE,
                seed,
                "importance_split",
                rep as u64,
            );
            let model =
                fit(config, &features.select_rows(&train), &take(labels, &train)).map_err(|e| Error::Repetition {
                    repetition: rep,
                    source: Box::new(e),
                })?;
            let raw = model.importance(kind);
            let total: f64 = raw.iter().sum();
            Ok(if total > 0.0 {
                raw.iter().map(|v| v / total).collect()
            } else {
                raw
            })
        })
        .collect();
    let mut scores = vec![0.0; p];
    for rep in per_rep {
        for (s, v) in scores.iter_mut().zip(rep?) {
            *s += v / IMPORTANCE_REPETITIONS as f64;
        }
    }
    let method = match kind {
        ImportanceKind::Gain => SelectionMethod::XgbGain,
        ImportanceKind::Weight => SelectionMethod::XgbWeight,
    };
    Ok(SelectionResult::from_scores(method, scores, n_select))
}

/// Permutation importance: validation AUC lost when one feature's
/// validation values are shuffled, averaged over `n_repeats` shuffles.
pub fn permutation_select(
    features: &Matrix,
    labels: &[u8],
    n_select: usize,
    n_repeats: usize,
    config: &BoostConfig,
    seed: u64,
) -> Result<SelectionResult> {
    let p = features.n_cols();
    check_n(n_select, p)?;
    if n_repeats == 0 {
        return Err(Error::Argument("n_repeats must be at least 1".into()));
    }
    let (train, held) = random_split(features.n_rows(), PERMUTATION_TRAIN_SHARE, seed, "permutation_split", 0);
    let model = fit(config, &features.select_rows(&train), &take(labels, &train))?;
    let val = features.select_rows(&held);
    let val_labels = take(labels, &held);
    let benchmark = auc(&model.predict_proba(&val)?, &val_labels)?;

    let scores: Vec<Result<f64>> = (0..p)
        .into_par_iter()
        .map(|j| {
            if model.split_count[j] == 0 {
                return Ok(0.0);
            }
            let mut total = 0.0;
            for rep in 0..n_repeats {
                let mut shuffled = val.clone();
                let mut rng = stream(seed, &format!("permute/{j}"), rep as u64);
                shuffled.column_mut(j).shuffle(&mut rng);
                total += benchmark - auc(&model.predict_proba(&shuffled)?, &val_labels)?;
            }
            Ok(total / n_repeats as f64)
        })
        .collect();
    let scores = scores.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(SelectionResult::from_scores(
        SelectionMethod::Permutation,
        scores,
        n_select,
    ))
}

/// Recursive elimination: refit on the active features and drop the `step`
/// with the lowest gain importance until `n_select` remain. Ties drop the
/// lower index first. Ranking lists the survivors by their final gain, then
/// eliminated features from last to first eliminated.
pub fn rfe_select(
    features: &Matrix,
    labels: &[u8],
    n_select: usize,
    step: usize,
    config: &BoostConfig,
) -> Result<SelectionResult> {
    let p = features.n_cols();
    check_n(n_select, p)?;
    if step == 0 {
        return Err(Error::Argument("step must be at least 1".into()));
    }
    let mut active: Vec<usize> = (0..p).collect();
    let mut eliminated: Vec<usize> = Vec::new();
    let mut scores = vec![0.0; p];
    while active.len() > n_select {
        let model = fit(config, &features.select_columns(&active), labels)?;
        let gain = model.importance(ImportanceKind::Gain);
        for (&j, g) in active.iter().zip(&gain) {
            scores[j] = *g;
        }
        let mut weakest = active.clone();
        weakest.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        let drop = step.min(active.len() - n_select);
        eliminated.extend_from_slice(&weakest[..drop]);
        active.retain(|j| !weakest[..drop].contains(j));
    }
    // Survivors carry their gain from the last fit (all zero if none ran).
    let mut order = active;
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.extend(eliminated.iter().rev());
    Ok(SelectionResult::from_order(
        SelectionMethod::Rfe,
        &order,
        n_select,
        scores,
    ))
}
