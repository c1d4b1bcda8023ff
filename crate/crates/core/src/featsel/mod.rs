//! Feature selection: correlation reduction, LASSO, tree-importance
//! selectors, permutation importance, recursive elimination, and the
//! keep-everything baseline.

mod correlation;
mod importance;
mod lasso;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbtree::{BoostConfig, ImportanceKind};
use crate::matrix::Matrix;

pub use correlation::{correlation_reduce, pearson_corr, spearman_corr, CorrelationFlavor};
pub use importance::{
    permutation_select, rfe_select, xgb_importance_select, IMPORTANCE_REPETITIONS, IMPORTANCE_TRAIN_SHARE,
    PERMUTATION_TRAIN_SHARE,
};
pub use lasso::{lasso_cv_errors, lasso_fit, lasso_select, LassoFit, DEFAULT_LAMBDA_GRID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    All,
    Pearson,
    Spearman,
    XgbGain,
    XgbWeight,
    Lasso,
    Permutation,
    Rfe,
}

impl SelectionMethod {
    pub const ALL: [SelectionMethod; 8] = [
        SelectionMethod::All,
        SelectionMethod::Pearson,
        SelectionMethod::Spearman,
        SelectionMethod::XgbGain,
        SelectionMethod::XgbWeight,
        SelectionMethod::Lasso,
        SelectionMethod::Permutation,
        SelectionMethod::Rfe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMethod::All => "all",
            SelectionMethod::Pearson => "pearson",
            SelectionMethod::Spearman => "spearman",
            SelectionMethod::XgbGain => "xgb_gain",
            SelectionMethod::XgbWeight => "xgb_weight",
            SelectionMethod::Lasso => "lasso",
            SelectionMethod::Permutation => "permutation",
            SelectionMethod::Rfe => "rfe",
        }
    }
}

impl fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown feature selection method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: SelectionMethod,
    /// Selected feature indices, most important first.
    pub selected: Vec<usize>,
    /// Rank of every feature (1 = most important).
    pub ranking: Vec<usize>,
    pub scores: Vec<f64>,
    /// Penalty chosen by cross-validation (LASSO only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl SelectionResult {
    /// Builds a result from a full importance order (best first).
    pub fn from_order(method: SelectionMethod, order: &[usize], n_select: usize, scores: Vec<f64>) -> Self {
        let mut ranking = vec![0; order.len()];
        for (pos, &j) in order.iter().enumerate() {
            ranking[j] = pos + 1;
        }
        Self {
            method,
            selected: order[..n_select.min(order.len())].to_vec(),
            ranking,
            scores,
            lambda: None,
        }
    }

    /// Ranks by descending score, ties by ascending index.
    pub fn from_scores(method: SelectionMethod, scores: Vec<f64>, n_select: usize) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Self::from_order(method, &order, n_select, scores)
    }
}

/// Identity selection: every feature in input order.
pub fn select_all(n_features: usize) -> SelectionResult {
    let order: Vec<usize> = (0..n_features).collect();
    SelectionResult::from_order(SelectionMethod::All, &order, n_features, vec![0.0; n_features])
}

/// Settings shared by all selectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectorConfig {
    /// Features to keep; `None` keeps as many as the data has signal
    /// features (or all features when that is unknown).
    pub n_select: Option<usize>,
    pub pair_threshold: f64,
    pub lambda_grid: Vec<f64>,
    pub n_repeats: usize,
    pub rfe_step: usize,
    /// Model used by the importance, permutation and elimination selectors.
    pub boost: BoostConfig,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            n_select: None,
            pair_threshold: 0.45,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            n_repeats: 1,
            rfe_step: 1,
            boost: BoostConfig::default(),
        }
    }
}

/// Runs `method` with `n_select` features to keep.
pub fn select(
    method: SelectionMethod,
    features: &Matrix,
    labels: &[u8],
    n_select: usize,
    config: &SelectorConfig,
    seed: u64,
) -> Result<SelectionResult> {
    match method {
        SelectionMethod::All => Ok(select_all(features.n_cols())),
        SelectionMethod::Pearson => correlation_reduce(
            features,
            labels,
            CorrelationFlavor::Pearson,
            config.pair_threshold,
            n_select,
        ),
        SelectionMethod::Spearman => correlation_reduce(
            features,
            labels,
            CorrelationFlavor::Spearman,
            config.pair_threshold,
            n_select,
        ),
        SelectionMethod::XgbGain => {
            xgb_importance_select(features, labels, ImportanceKind::Gain, n_select, &config.boost, seed)
        }
        SelectionMethod::XgbWeight => {
            xgb_importance_select(features, labels, ImportanceKind::Weight, n_select, &config.boost, seed)
        }
        SelectionMethod::Lasso => lasso_select(features, labels, &config.lambda_grid),
        SelectionMethod::Permutation => {
            permutation_select(features, labels, n_select, config.n_repeats, &config.boost, seed)
        }
        SelectionMethod::Rfe => rfe_select(features, labels, n_select, config.rfe_step, &config.boost),
    }
}
