//! Gradient-boosted decision trees for binary classification under
//! logistic loss, with exact greedy split finding and learned default
//! directions for missing values.

mod split;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use split::{best_split, midpoint, split_gain, SplitCandidate, SplitParams};
use split::{find_splits, NodeStats, Presorted, NO_NODE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostConfig {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub gamma: f64,
    pub l2_reg: f64,
    pub min_child_weight: f64,
    /// Unused by the deterministic exact-greedy learner; kept so configs
    /// round-trip with their seed.
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            learning_rate: 0.3,
            max_depth: 6,
            gamma: 0.0,
            l2_reg: 1.0,
            min_child_weight: 1.0,
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Fit(m));
        if self.n_estimators == 0 {
            return bad("n_estimators must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate {} outside (0, 1]", self.learning_rate));
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1".into());
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma {} must be finite and non-negative", self.gamma));
        }
        if !(self.l2_reg >= 0.0 && self.l2_reg.is_finite()) {
            return bad(format!("l2_reg {} must be finite and non-negative", self.l2_reg));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return bad(format!(
                "min_child_weight {} must be finite and non-negative",
                self.min_child_weight
            ));
        }
        Ok(())
    }

    fn split_params(&self) -> SplitParams {
        SplitParams {
            l2_reg: self.l2_reg,
            gamma: self.gamma,
            min_child_weight: self.min_child_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        default_left: bool,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        leaf: f64,
    },
}

/// One regression tree stored as a flat node list with the root at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Leaf value reached by `row` of `features`.
    pub fn predict_row(&self, features: &Matrix, row: usize) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { leaf } => return *leaf,
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    ..
                } => {
                    let x = features.get(row, *feature);
                    let go_left = if x.is_nan() { *default_left } else { x < *threshold };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn validate(&self, n_features: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Fit("tree has no nodes".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split {
                feature, left, right, ..
            } = node
            {
                if *feature >= n_features {
                    return Err(Error::Fit(format!("node {i} splits on unknown feature {feature}")));
                }
                if *left <= i || *right <= i || *left >= self.nodes.len() || *right >= self.nodes.len() {
                    return Err(Error::Fit(format!("node {i} has invalid children")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceKind {
    /// Total realized gain of the splits on each feature.
    Gain,
    /// Number of splits on each feature.
    Weight,
}

impl FromStr for ImportanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gain" => Ok(Self::Gain),
            "weight" => Ok(Self::Weight),
            other => Err(Error::Argument(format!("unknown importance kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub config: BoostConfig,
    pub n_features: usize,
    /// Initial margin: log-odds of the training positive rate.
    pub base_score: f64,
    pub trees: Vec<Tree>,
    pub gain_sum: Vec<f64>,
    pub split_count: Vec<usize>,
    /// Mean log-loss on the training rows after each round.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub training_loss: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn log_loss(labels: &[u8], margin: &[f64]) -> f64 {
    let total: f64 = labels
        .iter()
        .zip(margin)
        .map(|(&y, &m)| {
            // log(1 + e^m) - y m, computed without overflow
            let softplus = if m > 0.0 {
                m + (-m).exp().ln_1p()
            } else {
                m.exp().ln_1p()
            };
            softplus - f64::from(y) * m
        })
        .sum();
    total / labels.len() as f64
}

/// Fits a boosted ensemble to binary `labels`. Missing feature values are
/// NaN.
pub fn fit(config: &BoostConfig, features: &Matrix, labels: &[u8]) -> Result<BoostedModel> {
    config.validate()?;
    let n = features.n_rows();
    if labels.len() != n {
        return Err(Error::Schema(format!("{} labels for {} feature rows", labels.len(), n)));
    }
    if features.n_cols() == 0 {
        return Err(Error::Fit("no feature columns".into()));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Fit(format!("label {bad} is not 0 or 1")));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::Fit("training labels contain a single class".into()));
    }
    if features.columns().iter().flatten().any(|v| v.is_infinite()) {
        return Err(Error::Fit("feature values must be finite or missing".into()));
    }

    let rate = positives as f64 / n as f64;
    let base_score = (rate / (1.0 - rate)).ln();
    let presorted = Presorted::new(features);
    let params = config.split_params();
    let mut margin = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut node_of = vec![0u32; n];
    let mut model = BoostedModel {
        config: *config,
        n_features: features.n_cols(),
        base_score,
        trees: Vec::with_capacity(config.n_estimators),
        gain_sum: vec![0.0; features.n_cols()],
        split_count: vec![0; features.n_cols()],
        training_loss: Vec::with_capacity(config.n_estimators),
    };

    for _ in 0..config.n_estimators {
        for i in 0..n {
            let p = sigmoid(margin[i]);
            grad[i] = p - f64::from(labels[i]);
            hess[i] = p * (1.0 - p);
        }
        let tree = grow_tree(
            config,
            &params,
            features,
            &presorted,
            &grad,
            &hess,
            &mut node_of,
            &mut margin,
            &mut model,
        );
        model.trees.push(tree);
        model.training_loss.push(log_loss(labels, &margin));
    }
    Ok(model)
}

struct Frontier {
    node: usize,
    stats: NodeStats,
}

/// Grows one tree level by level, adds its leaf values to `margin` and
/// records split importance in `model`.
#[allow(clippy::too_many_arguments)]
fn grow_tree(
    config: &BoostConfig,
    params: &SplitParams,
    features: &Matrix,
    presorted: &Presorted,
    grad: &[f64],
    hess: &[f64],
    node_of: &mut [u32],
    margin: &mut [f64],
    model: &mut BoostedModel,
) -> Tree {
    let n = features.n_rows();
    let mut root = NodeStats::default();
    for i in 0..n {
        node_of[i] = 0;
        root.grad += grad[i];
        root.hess += hess[i];
    }
    let mut nodes = vec![Node::Leaf { leaf: 0.0 }];
    let mut frontier = vec![Frontier { node: 0, stats: root }];

    for depth in 0..=config.max_depth {
        if frontier.is_empty() {
            break;
        }
        let splits = if depth < config.max_depth {
            let stats: Vec<NodeStats> = frontier.iter().map(|f| f.stats).collect();
            find_splits(features, presorted, grad, hess, node_of, &stats, params)
        } else {
            vec![None; frontier.len()]
        };

        // Per frontier slot: (feature, threshold, default_left, left slot) or leaf value.
        enum Outcome {
            Split {
                feature: usize,
                threshold: f64,
                default_left: bool,
                left_slot: u32,
            },
            Leaf(f64),
        }
        let mut next: Vec<Frontier> = Vec::new();
        let mut outcomes = Vec::with_capacity(frontier.len());
        for (f, split) in frontier.iter().zip(&splits) {
            match split {
                Some(c) => {
                    let left = nodes.len();
                    nodes.push(Node::Leaf { leaf: 0.0 });
                    nodes.push(Node::Leaf { leaf: 0.0 });
                    nodes[f.node] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        default_left: c.default_left,
                        left,
                        right: left + 1,
                        gain: c.gain,
                    };
                    model.gain_sum[c.feature] += c.gain;
                    model.split_count[c.feature] += 1;
                    outcomes.push(Outcome::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        default_left: c.default_left,
                        left_slot: next.len() as u32,
                    });
                    next.push(Frontier {
                        node: left,
                        stats: NodeStats::default(),
                    });
                    next.push(Frontier {
                        node: left + 1,
                        stats: NodeStats::default(),
                    });
                }
                None => {
                    let weight = -f.stats.grad / (f.stats.hess + config.l2_reg) * config.learning_rate;
                    nodes[f.node] = Node::Leaf { leaf: weight };
                    outcomes.push(Outcome::Leaf(weight));
                }
            }
        }

        for i in 0..n {
            let slot = node_of[i];
            if slot == NO_NODE {
                continue;
            }
            match &outcomes[slot as usize] {
                Outcome::Leaf(w) => {
                    margin[i] += w;
                    node_of[i] = NO_NODE;
                }
                Outcome::Split {
                    feature,
                    threshold,
                    default_left,
                    left_slot,
                } => {
                    let x = features.get(i, *feature);
                    let go_left = if x.is_nan() { *default_left } else { x < *threshold };
                    let child = if go_left { *left_slot } else { left_slot + 1 };
                    node_of[i] = child;
                    let s = &mut next[child as usize].stats;
                    s.grad += grad[i];
                    s.hess += hess[i];
                }
            }
        }
        frontier = next;
    }
    Tree { nodes }
}

impl BoostedModel {
    /// Assembles a model from explicit trees, e.g. a hand-built ensemble.
    pub fn from_trees(n_features: usize, base_score: f64, trees: Vec<Tree>) -> Result<Self> {
        let mut gain_sum = vec![0.0; n_features];
        let mut split_count = vec![0; n_features];
        for tree in &trees {
            tree.validate(n_features)?;
            for node in &tree.nodes {
                if let Node::Split { feature, gain, .. } = node {
                    gain_sum[*feature] += gain;
                    split_count[*feature] += 1;
                }
            }
        }
        Ok(Self {
            config: BoostConfig {
                n_estimators: trees.len().max(1),
                ..BoostConfig::default()
            },
            n_features,
            base_score,
            trees,
            gain_sum,
            split_count,
            training_loss: Vec::new(),
        })
    }

    fn check_width(&self, features: &Matrix) -> Result<()> {
        if features.n_cols() != self.n_features {
            return Err(Error::Schema(format!(
                "model expects {} features, got {}",
                self.n_features,
                features.n_cols()
            )));
        }
        Ok(())
    }

    /// Raw additive scores (log-odds).
    pub fn predict_margin(&self, features: &Matrix) -> Result<Vec<f64>> {
        self.check_width(features)?;
        Ok((0..features.n_rows())
            .map(|r| {
                let mut m = self.base_score;
                for t in &self.trees {
                    m += t.predict_row(features, r);
                }
                m
            })
            .collect())
    }

    /// Positive-class probabilities.
    pub fn predict_proba(&self, features: &Matrix) -> Result<Vec<f64>> {
        Ok(self.predict_margin(features)?.into_iter().map(sigmoid).collect())
    }

    /// Raw importance per feature (not normalized).
    pub fn importance(&self, kind: ImportanceKind) -> Vec<f64> {
        match kind {
            ImportanceKind::Gain => self.gain_sum.clone(),
            ImportanceKind::Weight => self.split_count.iter().map(|&c| c as f64).collect(),
        }
    }

    /// JSON dump of the trees with per-node feature, threshold, default
    /// direction, children, gain and leaf values.
    pub fn dump_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Dump<'a> {
            base_score: f64,
            n_features: usize,
            trees: Vec<Vec<DumpNode<'a>>>,
        }
        #[derive(Serialize)]
        struct DumpNode<'a> {
            id: usize,
            #[serde(flatten)]
            node: &'a Node,
        }
        let dump = Dump {
            base_score: self.base_score,
            n_features: self.n_features,
            trees: self
                .trees
                .iter()
                .map(|t| {
                    t.nodes
                        .iter()
                        .enumerate()
                        .map(|(id, node)| DumpNode { id, node })
                        .collect()
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&dump)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn toy(n: usize, seed: u64, missing: f64) -> (Matrix, Vec<u8>) {
        let mut rng = crate::rng::from_seed(seed);
        let mut cols = vec![Vec::new(); 3];
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let z = 1.5 * x[0] - x[1] * x[1] + 0.5;
            labels.push(u8::from(rng.gen::<f64>() < 1.0 / (1.0 + (-z).exp())));
            for (c, v) in cols.iter_mut().zip(&x) {
                c.push(if rng.gen::<f64>() < missing { f64::NAN } else { *v });
            }
        }
        (Matrix::from_columns(cols).unwrap(), labels)
    }

    /// Exhaustive oracle: every feature, every distinct-value midpoint, both
    /// missing directions, applying the documented tie order.
    fn brute_force(
        x: &Matrix,
        g: &[f64],
        h: &[f64],
        rows: &[usize],
        p: &SplitParams,
    ) -> Option<(usize, f64, bool, f64)> {
        let gt: f64 = rows.iter().map(|&r| g[r]).sum();
        let ht: f64 = rows.iter().map(|&r| h[r]).sum();
        let mut best: Option<(usize, f64, bool, f64)> = None;
        for j in 0..x.n_cols() {
            let mut vals: Vec<f64> = rows.iter().map(|&r| x.get(r, j)).filter(|v| !v.is_nan()).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            let any_missing = rows.iter().any(|&r| x.get(r, j).is_nan());
            for w in vals.windows(2) {
                let t = midpoint(w[0], w[1]);
                for dl in [true, false] {
                    if !dl && !any_missing {
                        continue;
                    }
                    let left: Vec<usize> = rows
                        .iter()
                        .copied()
                        .filter(|&r| {
                            let v = x.get(r, j);
                            if v.is_nan() {
                                dl
                            } else {
                                v < t
                            }
                        })
                        .collect();
                    let gl: f64 = left.iter().map(|&r| g[r]).sum();
                    let hl: f64 = left.iter().map(|&r| h[r]).sum();
                    if hl < p.min_child_weight || ht - hl < p.min_child_weight {
                        continue;
                    }
                    let gain = 0.5
                        * (gl * gl / (hl + p.l2_reg) + (gt - gl).powi(2) / (ht - hl + p.l2_reg)
                            - gt * gt / (ht + p.l2_reg));
                    if gain - p.gamma <= 0.0 {
                        continue;
                    }
                    if best.is_none_or(|b| gain > b.3) {
                        best = Some((j, t, dl, gain));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn split_search_matches_exhaustive_oracle() {
        // Gradients and hessians are multiples of 1/16 and feature values are
        // small integers, so all sums are exact and gains compare bitwise.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for case in 0..60 {
            let n = 12 + case % 9;
            let cols: Vec<Vec<f64>> = (0..3)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if rng.gen::<f64>() < 0.15 {
                                f64::NAN
                            } else {
                                f64::from(rng.gen_range(0..6))
                            }
                        })
                        .collect()
                })
                .collect();
            let x = Matrix::from_columns(cols).unwrap();
            let g: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(-16..=16)) / 16.0).collect();
            let h: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(1..=8)) / 16.0).collect();
            let rows: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < 0.8).collect();
            let params = SplitParams {
                l2_reg: 1.0,
                gamma: if case % 3 == 0 { 0.05 } else { 0.0 },
                min_child_weight: if case % 4 == 0 { 0.5 } else { 0.0 },
            };
            let got = best_split(&x, &g, &h, &rows, &params).map(|c| (c.feature, c.threshold, c.default_left, c.gain));
            assert_eq!(got, brute_force(&x, &g, &h, &rows, &params), "case {case}");
        }
    }

    #[test]
    fn midpoint_stays_between_adjacent_floats() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = midpoint(a, b);
        assert!(a < t && t <= b);
        assert_eq!(midpoint(1.0, 3.0), 2.0);
    }

    #[test]
    fn training_loss_decreases_monotonically() {
        let (x, y) = toy(400, 1, 0.1);
        let cfg = BoostConfig {
            n_estimators: 30,
            learning_rate: 0.1,
            max_depth: 3,
            ..BoostConfig::default()
        };
        let model = fit(&cfg, &x, &y).unwrap();
        for w in model.training_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{w:?}");
        }
        assert!(model.trees.iter().all(|t| t.depth() <= 3));
    }

    #[test]
    fn predictions_reproduce_training_margin_and_respect_missing_direction() {
        let (x, y) = toy(300, 2, 0.3);
        let cfg = BoostConfig {
            n_estimators: 10,
            max_depth: 4,
            ..BoostConfig::default()
        };
        let a = fit(&cfg, &x, &y).unwrap();
        let b = fit(&cfg, &x, &y).unwrap();
        assert_eq!(a, b);
        let p = a.predict_proba(&x).unwrap();
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        // the learned training loss equals the loss of predict_margin
        let m = a.predict_margin(&x).unwrap();
        assert_eq!(log_loss(&y, &m), *a.training_loss.last().unwrap());
    }

    #[test]
    fn hand_built_tree_routes_missing_values() {
        let tree = Tree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.5,
                    default_left: false,
                    left: 1,
                    right: 2,
                    gain: 1.0,
                },
                Node::Leaf { leaf: -1.0 },
                Node::Leaf { leaf: 2.0 },
            ],
        };
        let model = BoostedModel::from_trees(1, 0.0, vec![tree]).unwrap();
        let x = Matrix::from_columns(vec![vec![0.0, 1.0, f64::NAN, 0.5]]).unwrap();
        assert_eq!(model.predict_margin(&x).unwrap(), vec![-1.0, 2.0, 2.0, 2.0]);
        let json = model.dump_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["trees"][0][0]["default_left"], false);
        assert_eq!(v["trees"][0][2]["leaf"], 2.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let x = Matrix::from_columns(vec![vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(
            fit(&BoostConfig::default(), &x, &[1, 1, 1]),
            Err(Error::Fit(_))
        ));
        assert!(matches!(
            fit(&BoostConfig::default(), &x, &[1, 0]),
            Err(Error::Schema(_))
        ));
        let bad = BoostConfig {
            learning_rate: 0.0,
            ..BoostConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!("cover".parse::<ImportanceKind>().is_err());
    }

    #[test]
    fn importance_favours_informative_feature() {
        let (x, y) = toy(600, 3, 0.0);
        let model = fit(
            &BoostConfig {
                n_estimators: 20,
                max_depth: 3,
                ..Default::default()
            },
            &x,
            &y,
        )
        .unwrap();
        let gain = model.importance(ImportanceKind::Gain);
        assert!(gain[0] > gain[2] && gain[1] > gain[2], "{gain:?}");
        let weight = model.importance(ImportanceKind::Weight);
        assert_eq!(
            weight.iter().sum::<f64>() as usize,
            model.split_count.iter().sum::<usize>()
        );
    }
}
