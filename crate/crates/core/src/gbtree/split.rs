//! Exact greedy split search.
//!
//! Every feature is sorted once per fit. Growing one tree level scans each
//! feature's sorted rows a single time, accumulating gradient statistics for
//! all frontier nodes at once. Candidates are compared by gain, then by
//! feature index, then by threshold, then with missing values sent left
//! before right.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

pub(crate) const NO_NODE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    pub l2_reg: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub default_left: bool,
    /// Loss reduction before the `gamma` penalty.
    pub gain: f64,
}

/// Gradient and hessian sums of one node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct NodeStats {
    pub grad: f64,
    pub hess: f64,
}

/// Loss reduction of splitting a node with sums `(g, h)` into a left part
/// `(gl, hl)` and the remainder.
#[inline]
pub fn split_gain(g: f64, h: f64, gl: f64, hl: f64, lambda: f64) -> f64 {
    let gr = g - gl;
    let hr = h - hl;
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda))
}

/// Midpoint between consecutive distinct values `lo < hi`, nudged so that
/// `lo < threshold <= hi` holds in floating point.
#[inline]
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = lo + (hi - lo) / 2.0;
    if t <= lo {
        hi
    } else {
        t
    }
}

/// Row indices of every feature sorted by value (ties by row), with the
/// missing rows listed separately.
pub(crate) struct Presorted {
    pub sorted: Vec<Vec<u32>>,
    pub missing: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(features: &Matrix) -> Self {
        let (sorted, missing) = (0..features.n_cols())
            .into_par_iter()
            .map(|j| {
                let col = features.column(j);
                let mut present: Vec<u32> = Vec::with_capacity(col.len());
                let mut missing = Vec::new();
                for (i, v) in col.iter().enumerate() {
                    if v.is_nan() {
                        missing.push(i as u32);
                    } else {
                        present.push(i as u32);
                    }
                }
                present.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                (present, missing)
            })
            .unzip();
        Self { sorted, missing }
    }
}

#[inline]
fn better(candidate: &SplitCandidate, incumbent: &Option<SplitCandidate>) -> bool {
    match incumbent {
        None => true,
        Some(best) => candidate.gain > best.gain,
    }
}

/// Best split of every frontier node along feature `j`.
#[allow(clippy::too_many_arguments)]
fn scan_feature(
    j: usize,
    features: &Matrix,
    presorted: &Presorted,
    grad: &[f64],
    hess: &[f64],
    node_of: &[u32],
    nodes: &[NodeStats],
    params: &SplitParams,
) -> Vec<Option<SplitCandidate>> {
    let k = nodes.len();
    let col = features.column(j);
    let mut miss_g = vec![0.0; k];
    let mut miss_h = vec![0.0; k];
    let mut miss_n = vec![0usize; k];
    for &r in &presorted.missing[j] {
        let n = node_of[r as usize];
        if n != NO_NODE {
            let n = n as usize;
            miss_g[n] += grad[r as usize];
            miss_h[n] += hess[r as usize];
            miss_n[n] += 1;
        }
    }
    let mut gl = vec![0.0; k];
    let mut hl = vec![0.0; k];
    let mut last = vec![f64::NAN; k];
    let mut best: Vec<Option<SplitCandidate>> = vec![None; k];
    let lambda = params.l2_reg;
    let mcw = params.min_child_weight;

    for &r in &presorted.sorted[j] {
        let r = r as usize;
        let n = node_of[r];
        if n == NO_NODE {
            continue;
        }
        let n = n as usize;
        let v = col[r];
        let prev = last[n];
        if !prev.is_nan() && v > prev {
            let threshold = midpoint(prev, v);
            let NodeStats { grad: g, hess: h } = nodes[n];
            // missing rows to the left
            let (l_g, l_h) = (gl[n] + miss_g[n], hl[n] + miss_h[n]);
            if l_h >= mcw && h - l_h >= mcw {
                let cand = SplitCandidate {
                    feature: j,
                    threshold,
                    default_left: true,
                    gain: split_gain(g, h, l_g, l_h, lambda),
                };
                if cand.gain - params.gamma > 0.0 && better(&cand, &best[n]) {
                    best[n] = Some(cand);
                }
            }
            // missing rows to the right
            if miss_n[n] > 0 && hl[n] >= mcw && h - hl[n] >= mcw {
                let cand = SplitCandidate {
                    feature: j,
                    threshold,
                    default_left: false,
                    gain: split_gain(g, h, gl[n], hl[n], lambda),
                };
                if cand.gain - params.gamma > 0.0 && better(&cand, &best[n]) {
                    best[n] = Some(cand);
                }
            }
        }
        gl[n] += grad[r];
        hl[n] += hess[r];
        last[n] = v;
    }
    best
}

/// Best split per frontier node across all features; `None` where no split
/// clears `gamma` and the child-weight bound.
pub(crate) fn find_splits(
    features: &Matrix,
    presorted: &Presorted,
    grad: &[f64],
    hess: &[f64],
    node_of: &[u32],
    nodes: &[NodeStats],
    params: &SplitParams,
) -> Vec<Option<SplitCandidate>> {
    let per_feature: Vec<Vec<Option<SplitCandidate>>> = (0..features.n_cols())
        .into_par_iter()
        .map(|j| scan_feature(j, features, presorted, grad, hess, node_of, nodes, params))
        .collect();
    // Reduction in feature order keeps the lowest feature index on ties.
    let mut best: Vec<Option<SplitCandidate>> = vec![None; nodes.len()];
    for feature_best in per_feature {
        for (slot, cand) in best.iter_mut().zip(feature_best) {
            if let Some(c) = cand {
                if better(&c, slot) {
                    *slot = Some(c);
                }
            }
        }
    }
    best
}

/// Best split of the node holding `rows`, given per-row gradients and
/// hessians for the whole table.
pub fn best_split(
    features: &Matrix,
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    params: &SplitParams,
) -> Option<SplitCandidate> {
    let presorted = Presorted::new(features);
    let mut node_of = vec![NO_NODE; features.n_rows()];
    let mut stats = NodeStats::default();
    let mut in_node = vec![false; features.n_rows()];
    for &r in rows {
        in_node[r] = true;
    }
    for r in 0..features.n_rows() {
        if in_node[r] {
            node_of[r] = 0;
            stats.grad += grad[r];
            stats.hess += hess[r];
        }
    }
    find_splits(features, &presorted, grad, hess, &node_of, &[stats], params)
        .pop()
        .flatten()
}
