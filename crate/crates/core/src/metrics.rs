//! AUC, overfit gap and cross-iteration summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean with a two-standard-deviation band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryBand {
    pub mean: f64,
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

impl SummaryBand {
    /// True when the two bands share at least one point.
    pub fn overlaps(&self, other: &SummaryBand) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// Fractional ranks (1-based) with ties sharing their average rank.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Area under the ROC curve via the Mann–Whitney rank sum. Ties earn half
/// credit.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Numeric {
            row: i,
            message: "score is NaN".into(),
        });
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("AUC needs both classes among the labels".into()));
    }
    let ranks = fractional_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &y)| y == 1).map(|(r, _)| r).sum();
    let n_pos = n_pos as f64;
    let u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    Ok(u / (n_pos * n_neg as f64))
}

/// Training AUC minus testing AUC.
pub fn auc_gap(train_auc: f64, test_auc: f64) -> f64 {
    train_auc - test_auc
}

/// Sample mean and standard deviation (n − 1 denominator, zero for a single
/// value) with the mean ± 2·std band.
pub fn summarize(values: &[f64]) -> Result<SummaryBand> {
    if values.is_empty() {
        return Err(Error::Argument("cannot summarize an empty sequence".into()));
    }
    let n = values.len();
    if values.iter().all(|v| *v == values[0]) {
        let v = values[0];
        return Ok(SummaryBand {
            mean: v,
            std: 0.0,
            lower: v,
            upper: v,
            n,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(SummaryBand {
        mean,
        std,
        lower: mean - 2.0 * std,
        upper: mean + 2.0 * std,
        n,
    })
}

/// Per-feature mean rank across several rankings.
pub fn average_rank(rankings: &[Vec<usize>]) -> Result<Vec<f64>> {
    let Some(first) = rankings.first() else {
        return Err(Error::Argument("no rankings to average".into()));
    };
    let width = first.len();
    if rankings.iter().any(|r| r.len() != width) {
        return Err(Error::Argument("rankings have different lengths".into()));
    }
    let mut sums = vec![0.0; width];
    for ranking in rankings {
        for (s, &r) in sums.iter_mut().zip(ranking) {
            *s += r as f64;
        }
    }
    let n = rankings.len() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let mut credit = 0.0;
        let mut pairs = 0.0;
        for (i, &yi) in labels.iter().enumerate() {
            if yi != 1 {
                continue;
            }
            for (j, &yj) in labels.iter().enumerate() {
                if yj != 0 {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    credit += 1.0;
                } else if scores[i] == scores[j] {
                    credit += 0.5;
                }
            }
        }
        credit / pairs
    }

    #[test]
    fn perfect_order_and_all_ties() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 6], &[0, 1, 0, 1, 1, 0]).unwrap(), 0.5);
    }

    #[test]
    fn eight_row_case_matches_pair_count() {
        let scores = [0.9, 0.4, 0.4, 0.7, 0.1, 0.4, 0.8, 0.2];
        let labels = [1, 0, 1, 1, 0, 0, 0, 1];
        // 16 pairs: wins counted by hand = 9, ties = 2
        assert_eq!(brute_force_auc(&scores, &labels), 10.0 / 16.0);
        assert_eq!(auc(&scores, &labels).unwrap(), 10.0 / 16.0);
    }

    #[test]
    fn single_class_is_undefined() {
        assert!(matches!(auc(&[0.1, 0.2], &[1, 1]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn gap_is_a_difference() {
        assert_eq!(auc_gap(0.9, 0.9), 0.0);
        assert!((auc_gap(0.99, 0.90) - 0.09).abs() < 1e-12);
    }

    #[test]
    fn summary_of_two_values() {
        let band = summarize(&[0.8, 0.9]).unwrap();
        assert!((band.mean - 0.85).abs() < 1e-12);
        assert!((band.std - 0.005f64.sqrt()).abs() < 1e-12);
        assert!((band.lower - 0.708_578_643_762_690_5).abs() < 1e-12);
        assert!((band.upper - 0.991_421_356_237_309_5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_summaries() {
        let c = summarize(&[0.7, 0.7, 0.7]).unwrap();
        assert_eq!(c.std, 0.0);
        assert_eq!((c.lower, c.upper), (c.mean, c.mean));
        let one = summarize(&[0.42]).unwrap();
        assert_eq!((one.lower, one.mean, one.upper, one.n), (0.42, 0.42, 0.42, 1));
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn average_rank_cases() {
        let r = vec![vec![1, 2, 3], vec![1, 2, 3]];
        assert_eq!(average_rank(&r).unwrap(), vec![1.0, 2.0, 3.0]);
        let r = vec![vec![1, 2], vec![3, 1]];
        assert_eq!(average_rank(&r).unwrap()[0], 2.0);
        assert!(average_rank(&[vec![1, 2], vec![1]]).is_err());
    }

    #[test]
    fn fractional_ranks_average_ties() {
        assert_eq!(fractional_ranks(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
    }

    proptest! {
        #[test]
        fn auc_equals_pair_count(
            raw in proptest::collection::vec((0u8..6, any::<bool>()), 2..30)
        ) {
            let scores: Vec<f64> = raw.iter().map(|(s, _)| f64::from(*s) / 5.0).collect();
            let labels: Vec<u8> = raw.iter().map(|(_, y)| u8::from(*y)).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            prop_assert_eq!(auc(&scores, &labels).unwrap(), brute_force_auc(&scores, &labels));
        }

        #[test]
        fn auc_invariant_under_increasing_transform(
            raw in proptest::collection::vec((-5.0f64..5.0, any::<bool>()), 2..40)
        ) {
            let scores: Vec<f64> = raw.iter().map(|(s, _)| *s).collect();
            let labels: Vec<u8> = raw.iter().map(|(_, y)| u8::from(*y)).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let transformed: Vec<f64> = scores.iter().map(|s| s.exp() * 3.0 + 1.0).collect();
            prop_assert_eq!(auc(&scores, &labels).unwrap(), auc(&transformed, &labels).unwrap());
        }

        #[test]
        fn auc_complement_for_tie_free_scores(
            raw in proptest::collection::btree_map(-1000i32..1000, any::<bool>(), 2..40)
        ) {
            let scores: Vec<f64> = raw.keys().map(|&s| f64::from(s)).collect();
            let labels: Vec<u8> = raw.values().map(|&y| u8::from(y)).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            let total = auc(&scores, &labels).unwrap() + auc(&neg, &labels).unwrap();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn summarize_is_permutation_invariant(
            mut values in proptest::collection::vec(0.0f64..1.0, 1..20)
        ) {
            let a = summarize(&values).unwrap();
            values.reverse();
            let b = summarize(&values).unwrap();
            prop_assert!((a.mean - b.mean).abs() < 1e-12);
            prop_assert!((a.std - b.std).abs() < 1e-12);
        }
    }
}
