//! Imputers for missing numeric values: mean, median, missing indicator,
//! decile, cluster and single-feature tree. Each is fitted on training rows
//! and then applied unchanged to any table with the same columns.

mod kmeans;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;
use crate::standardize::Standardizer;
use crate::synthdata::median;

pub use kmeans::{kmeans, nearest, KMeans, MAX_ITERATIONS};
pub use tree::{fit_leaves, welch_t, Leaf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeMethod {
    Mean,
    Median,
    MissingIndicator,
    Decile,
    Cluster,
    Tree,
}

impl ImputeMethod {
    pub const ALL: [ImputeMethod; 6] = [
        ImputeMethod::Mean,
        ImputeMethod::Median,
        ImputeMethod::MissingIndicator,
        ImputeMethod::Decile,
        ImputeMethod::Cluster,
        ImputeMethod::Tree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ImputeMethod::Mean => "mean",
            ImputeMethod::Median => "median",
            ImputeMethod::MissingIndicator => "missing_indicator",
            ImputeMethod::Decile => "decile",
            ImputeMethod::Cluster => "cluster",
            ImputeMethod::Tree => "tree",
        }
    }

    fn needs_labels(self) -> bool {
        matches!(self, ImputeMethod::Decile | ImputeMethod::Tree)
    }
}

impl fmt::Display for ImputeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ImputeMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown imputation method {s:?}")))
    }
}

/// Statistic used for the chosen decile's fill value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecileStatistic {
    Median,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImputerConfig {
    pub sentinel: f64,
    pub k: usize,
    pub decile_statistic: DecileStatistic,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    pub seed: u64,
}

impl Default for ImputerConfig {
    fn default() -> Self {
        Self {
            sentinel: -9999.0,
            k: 3,
            decile_statistic: DecileStatistic::Median,
            tree_max_depth: 3,
            tree_min_leaf: 20,
            seed: 0,
        }
    }
}

/// How one feature's fill value was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum FillRule {
    /// No training missingness; any missing cell later gets the median.
    PassThrough,
    Mean,
    Median,
    Sentinel,
    /// Fewer observed values than the method needs; median used.
    Fallback,
    Decile {
        bin: usize,
        bins: usize,
        missing_rate: f64,
        bin_rate: f64,
    },
    TreeLeaf {
        leaf: usize,
        leaves: Vec<Leaf>,
    },
    Cluster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterState {
    pub k: usize,
    /// Mean-fill and scaling used to place rows for clustering only.
    pub scaffold: Standardizer,
    pub centroids: Vec<Vec<f64>>,
    /// Fill value per cluster and feature.
    pub fills: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputerState {
    pub method: ImputeMethod,
    /// Fill value per feature (for clusters: the global-mean fallback).
    pub fills: Vec<f64>,
    pub rules: Vec<FillRule>,
    /// Features that receive an indicator column (missing indicator only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indicators: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentinel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<ClusterState>,
}

fn observed(col: &[f64]) -> Vec<f64> {
    col.iter().copied().filter(|v| !v.is_nan()).collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Per-cluster, per-feature mean of the observed values, falling back to
/// the feature's global mean for clusters with no observed value.
pub fn cluster_fill_values(features: &Matrix, assignments: &[usize], k: usize) -> Vec<Vec<f64>> {
    let mut fills = vec![vec![0.0; features.n_cols()]; k];
    for (j, col) in features.columns().iter().enumerate() {
        let global = mean(&observed(col));
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (v, &a) in col.iter().zip(assignments) {
            if !v.is_nan() {
                sums[a] += v;
                counts[a] += 1;
            }
        }
        for c in 0..k {
            fills[c][j] = if counts[c] > 0 {
                sums[c] / counts[c] as f64
            } else {
                global
            };
        }
    }
    fills
}

/// Decile boundaries `sorted[⌊k·m/10⌋]` for k = 1..9 with duplicates
/// removed; bin `b` holds values in `[boundary[b-1], boundary[b])`.
pub fn decile_boundaries(sorted: &[f64]) -> Vec<f64> {
    let m = sorted.len();
    let mut b: Vec<f64> = (1..10).map(|k| sorted[k * m / 10]).collect();
    b.dedup();
    b
}

fn bin_of(v: f64, boundaries: &[f64]) -> usize {
    boundaries.partition_point(|b| *b <= v)
}

fn fit_decile(col: &[f64], labels: &[u8], stat: DecileStatistic) -> (f64, FillRule) {
    let mut present: Vec<(f64, u8)> = Vec::new();
    let (mut miss_n, mut miss_pos) = (0usize, 0usize);
    for (v, &y) in col.iter().zip(labels) {
        if v.is_nan() {
            miss_n += 1;
            miss_pos += usize::from(y);
        } else {
            present.push((*v, y));
        }
    }
    let values: Vec<f64> = present.iter().map(|p| p.0).collect();
    if miss_n == 0 {
        return (median(&values), FillRule::PassThrough);
    }
    if present.len() < 10 {
        return (median(&values), FillRule::Fallback);
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let boundaries = decile_boundaries(&sorted);
    let n_bins = boundaries.len() + 1;
    let mut bin_values: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    let mut bin_pos = vec![0usize; n_bins];
    for (v, y) in &present {
        let b = bin_of(*v, &boundaries);
        bin_values[b].push(*v);
        bin_pos[b] += usize::from(*y);
    }
    let missing_rate = miss_pos as f64 / miss_n as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    for (b, vals) in bin_values.iter().enumerate() {
        if vals.is_empty() {
            continue;
        }
        let rate = bin_pos[b] as f64 / vals.len() as f64;
        let dist = (rate - missing_rate).abs();
        if best.is_none_or(|(_, d, _)| dist < d) {
            best = Some((b, dist, rate));
        }
    }
    let (bin, _, bin_rate) = best.expect("at least one bin is non-empty");
    let value = match stat {
        DecileStatistic::Median => median(&bin_values[bin]),
        DecileStatistic::Mean => mean(&bin_values[bin]),
    };
    (
        value,
        FillRule::Decile {
            bin,
            bins: n_bins,
            missing_rate,
            bin_rate,
        },
    )
}

fn fit_tree(col: &[f64], labels: &[u8], max_depth: usize, min_leaf: usize) -> (f64, FillRule) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut missing_y = Vec::new();
    for (v, &y) in col.iter().zip(labels) {
        if v.is_nan() {
            missing_y.push(f64::from(y));
        } else {
            xs.push(*v);
            ys.push(y);
        }
    }
    if missing_y.is_empty() {
        return (median(&xs), FillRule::PassThrough);
    }
    let raw = fit_leaves(&xs, &ys, max_depth, min_leaf);
    let leaves: Vec<Leaf> = raw
        .iter()
        .map(|(lower, upper, rows)| {
            let vals: Vec<f64> = rows.iter().map(|&i| xs[i]).collect();
            let labs: Vec<f64> = rows.iter().map(|&i| f64::from(ys[i])).collect();
            Leaf {
                lower: *lower,
                upper: *upper,
                count: rows.len(),
                label_mean: mean(&labs),
                median: median(&vals),
                t: welch_t(&labs, &missing_y),
            }
        })
        .collect();
    let mut leaf = 0;
    for (i, l) in leaves.iter().enumerate() {
        if l.t.abs() < leaves[leaf].t.abs() {
            leaf = i;
        }
    }
    (leaves[leaf].median, FillRule::TreeLeaf { leaf, leaves })
}

impl ImputerState {
    /// Fits `method` on training `features` (missing cells are NaN).
    /// Decile and tree imputation need the training labels.
    pub fn fit(method: ImputeMethod, features: &Matrix, labels: Option<&[u8]>, config: &ImputerConfig) -> Result<Self> {
        let labels = match (method.needs_labels(), labels) {
            (true, None) => return Err(Error::Fit(format!("{method} imputation needs training labels"))),
            (true, Some(l)) if l.len() != features.n_rows() => {
                return Err(Error::Schema(format!(
                    "{} labels for {} rows",
                    l.len(),
                    features.n_rows()
                )))
            }
            (_, l) => l,
        };
        let p = features.n_cols();
        for j in 0..p {
            if features.column(j).iter().all(|v| v.is_nan()) {
                return Err(Error::Fit(format!("feature {j} has no observed training values")));
            }
        }
        let has_missing: Vec<bool> = features
            .columns()
            .iter()
            .map(|c| c.iter().any(|v| v.is_nan()))
            .collect();
        let mut state = ImputerState {
            method,
            fills: Vec::with_capacity(p),
            rules: Vec::with_capacity(p),
            indicators: Vec::new(),
            sentinel: None,
            cluster: None,
        };
        match method {
            ImputeMethod::Mean | ImputeMethod::Median | ImputeMethod::Cluster => {
                for col in features.columns() {
                    let obs = observed(col);
                    if method == ImputeMethod::Median {
                        state.fills.push(median(&obs));
                        state.rules.push(FillRule::Median);
                    } else {
                        state.fills.push(mean(&obs));
                        state.rules.push(if method == ImputeMethod::Mean {
                            FillRule::Mean
                        } else {
                            FillRule::Cluster
                        });
                    }
                }
                if method == ImputeMethod::Cluster {
                    state.cluster = Some(fit_clusters(features, config)?);
                }
            }
            ImputeMethod::MissingIndicator => {
                let s = config.sentinel;
                for (j, col) in features.columns().iter().enumerate() {
                    let obs = observed(col);
                    let (lo, hi) = obs
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
                    if !s.is_finite() || (lo..=hi).contains(&s) {
                        return Err(Error::Fit(format!(
                            "sentinel {s} lies inside the observed range [{lo}, {hi}] of feature {j}"
                        )));
                    }
                    state.fills.push(s);
                    state.rules.push(FillRule::Sentinel);
                    if has_missing[j] {
                        state.indicators.push(j);
                    }
                }
                state.sentinel = Some(s);
            }
            ImputeMethod::Decile => {
                let labels = labels.expect("checked above");
                for col in features.columns() {
                    let (v, rule) = fit_decile(col, labels, config.decile_statistic);
                    state.fills.push(v);
                    state.rules.push(rule);
                }
            }
            ImputeMethod::Tree => {
                let labels = labels.expect("checked above");
                for col in features.columns() {
                    let (v, rule) = fit_tree(col, labels, config.tree_max_depth, config.tree_min_leaf);
                    state.fills.push(v);
                    state.rules.push(rule);
                }
            }
        }
        Ok(state)
    }

    /// Column names after transform: the inputs plus `<name>__missing` for
    /// each indicator.
    pub fn output_names(&self, input: &[String]) -> Vec<String> {
        let mut names = input.to_vec();
        names.extend(self.indicators.iter().map(|&j| format!("{}__missing", input[j])));
        names
    }

    /// Fills missing cells; observed cells are copied unchanged.
    pub fn transform(&self, features: &Matrix) -> Result<Matrix> {
        if features.n_cols() != self.fills.len() {
            return Err(Error::Schema(format!(
                "imputer fitted on {} features, got {}",
                self.fills.len(),
                features.n_cols()
            )));
        }
        let assignments = match &self.cluster {
            Some(c) => Some(assign_clusters(c, features)?),
            None => None,
        };
        let mut out = features.clone();
        for j in 0..features.n_cols() {
            let fill = self.fills[j];
            let col = out.column_mut(j);
            for (i, v) in col.iter_mut().enumerate() {
                if v.is_nan() {
                    *v = match (&assignments, &self.cluster) {
                        (Some(a), Some(c)) => c.fills[a[i]][j],
                        _ => fill,
                    };
                }
            }
        }
        for &j in &self.indicators {
            let ind = features
                .column(j)
                .iter()
                .map(|v| if v.is_nan() { 1.0 } else { 0.0 })
                .collect();
            out.push_column(ind)?;
        }
        Ok(out)
    }
}

/// Working copy for clustering: missing cells at the training mean, then
/// standardized.
fn scaffold(features: &Matrix, scaler: &Standardizer) -> Result<Matrix> {
    let mut filled = features.clone();
    for j in 0..filled.n_cols() {
        let m = scaler.means[j];
        filled
            .column_mut(j)
            .iter_mut()
            .filter(|v| v.is_nan())
            .for_each(|v| *v = m);
    }
    scaler.transform(&filled)
}

fn fit_clusters(features: &Matrix, config: &ImputerConfig) -> Result<ClusterState> {
    let scaler = Standardizer::fit(features);
    let work = scaffold(features, &scaler)?;
    let mut rng = rng::stream(config.seed, "kmeans", 0);
    let k = config.k.min(features.n_rows());
    let km = kmeans(&work, k, &mut rng)?;
    let fills = cluster_fill_values(features, &km.assignments, k);
    Ok(ClusterState {
        k,
        scaffold: scaler,
        centroids: km.centroids,
        fills,
    })
}

fn assign_clusters(state: &ClusterState, features: &Matrix) -> Result<Vec<usize>> {
    let work = scaffold(features, &state.scaffold)?;
    Ok((0..work.n_rows())
        .map(|i| nearest(&work.row(i), &state.centroids))
        .collect())
}
