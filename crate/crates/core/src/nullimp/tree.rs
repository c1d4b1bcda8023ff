//! Single-feature regression tree on the labels and Welch's t statistic,
//! the pieces behind tree-based imputation.

use serde::{Deserialize, Serialize};

use crate::gbtree::midpoint;

/// One leaf of a single-feature tree: a contiguous run of the sorted
/// observed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    /// Feature interval `[lower, upper)`; open ends are infinite and
    /// serialize as null.
    #[serde(with = "open_lower")]
    pub lower: f64,
    #[serde(with = "open_upper")]
    pub upper: f64,
    pub count: usize,
    pub label_mean: f64,
    pub median: f64,
    /// Welch t against the missing group.
    pub t: f64,
}

macro_rules! open_end {
    ($name:ident, $inf:expr) => {
        mod $name {
            use serde::{Deserialize, Deserializer, Serialize, Serializer};

            pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                v.is_finite().then_some(*v).serialize(s)
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                Ok(Option::<f64>::deserialize(d)?.unwrap_or($inf))
            }
        }
    };
}

open_end!(open_lower, f64::NEG_INFINITY);
open_end!(open_upper, f64::INFINITY);

/// Leaves (left to right) of a CART regression tree of `labels` on the
/// single feature `values`, grown to `max_depth` with at least `min_leaf`
/// rows per leaf. Splits maximize the reduction in squared error.
pub fn fit_leaves(values: &[f64], labels: &[u8], max_depth: usize, min_leaf: usize) -> Vec<(f64, f64, Vec<usize>)> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| f64::from(labels[i])).collect();
    let mut prefix = vec![0.0; ys.len() + 1];
    for (i, y) in ys.iter().enumerate() {
        prefix[i + 1] = prefix[i] + y;
    }
    let mut leaves = Vec::new();
    grow(
        &sorted,
        &prefix,
        0,
        sorted.len(),
        f64::NEG_INFINITY,
        f64::INFINITY,
        max_depth,
        min_leaf.max(1),
        &mut leaves,
    );
    leaves
        .into_iter()
        .map(|(lo, hi, a, b)| (lo, hi, order[a..b].to_vec()))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn grow(
    x: &[f64],
    prefix: &[f64],
    a: usize,
    b: usize,
    lower: f64,
    upper: f64,
    depth: usize,
    min_leaf: usize,
    out: &mut Vec<(f64, f64, usize, usize)>,
) {
    let n = b - a;
    let mut best: Option<(f64, usize)> = None;
    if depth > 0 && n >= 2 * min_leaf {
        let total = prefix[b] - prefix[a];
        // SSE = Σy² − (Σy)²/n and y² = y for 0/1 labels, so maximizing
        // the reduction maximizes the between-child term.
        let parent = total * total / n as f64;
        for s in (a + min_leaf)..=(b - min_leaf) {
            if x[s] == x[s - 1] {
                continue;
            }
            let left = prefix[s] - prefix[a];
            let right = total - left;
            let score = left * left / (s - a) as f64 + right * right / (b - s) as f64 - parent;
            if score > 1e-12 && best.is_none_or(|(bs, _)| score > bs) {
                best = Some((score, s));
            }
        }
    }
    match best {
        Some((_, s)) => {
            let t = midpoint(x[s - 1], x[s]);
            grow(x, prefix, a, s, lower, t, depth - 1, min_leaf, out);
            grow(x, prefix, s, b, t, upper, depth - 1, min_leaf, out);
        }
        None => out.push((lower, upper, a, b)),
    }
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Welch's two-sample t statistic. Zero when both groups have zero
/// variance.
pub fn welch_t(a: &[f64], b: &[f64]) -> f64 {
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let se2 = va / a.len() as f64 + vb / b.len() as f64;
    if se2 > 0.0 {
        (ma - mb) / se2.sqrt()
    } else {
        0.0
    }
}
