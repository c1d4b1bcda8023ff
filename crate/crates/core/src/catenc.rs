//! Categorical encoders fitted on training data: one-hot, reverse Helmert,
//! frequency and binary.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingMethod {
    #[serde(rename = "one_hot")]
    OneHot,
    #[serde(rename = "helmert")]
    HelmertReverse,
    #[serde(rename = "frequency")]
    Frequency,
    #[serde(rename = "binary")]
    Binary,
}

impl EncodingMethod {
    pub const ALL: [EncodingMethod; 4] = [
        EncodingMethod::OneHot,
        EncodingMethod::HelmertReverse,
        EncodingMethod::Frequency,
        EncodingMethod::Binary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EncodingMethod::OneHot => "one_hot",
            EncodingMethod::HelmertReverse => "helmert",
            EncodingMethod::Frequency => "frequency",
            EncodingMethod::Binary => "binary",
        }
    }
}

impl fmt::Display for EncodingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncodingMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown encoding method {s:?}")))
    }
}

/// Value of reverse-Helmert contrast `j` (1-based, `1..n`) for the category
/// at 0-based position `i`: earlier categories get −1/(j+1), category j+1
/// gets j/(j+1), later ones 0.
pub fn helmert_value(i: usize, j: usize) -> f64 {
    let pos = i + 1;
    if pos <= j {
        -1.0 / (j as f64 + 1.0)
    } else if pos == j + 1 {
        j as f64 / (j as f64 + 1.0)
    } else {
        0.0
    }
}

/// Bits needed for 1-based indices up to `n`, i.e. ⌈log₂(n+1)⌉.
pub fn binary_width(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderState {
    pub method: EncodingMethod,
    pub feature: String,
    /// Categories in order of first appearance in the training column.
    pub category_order: Vec<String>,
    /// Training relative frequencies, aligned with `category_order`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frequencies: Vec<f64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

/// Output of [`EncoderState::transform`].
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub columns: Matrix,
    pub names: Vec<String>,
    /// Rows whose category was not seen at fit time.
    pub unseen_rows: Vec<usize>,
}

impl EncoderState {
    pub fn fit(method: EncodingMethod, feature: &str, column: &[String]) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::Fit(format!("cannot fit an encoder on empty column {feature:?}")));
        }
        let mut category_order: Vec<String> = Vec::new();
        let mut index = HashMap::new();
        let mut counts: Vec<usize> = Vec::new();
        for value in column {
            let k = *index.entry(value.clone()).or_insert_with(|| {
                category_order.push(value.clone());
                counts.push(0);
                category_order.len() - 1
            });
            counts[k] += 1;
        }
        let frequencies = if method == EncodingMethod::Frequency {
            counts.iter().map(|&c| c as f64 / column.len() as f64).collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            method,
            feature: feature.to_string(),
            category_order,
            frequencies,
            index,
        })
    }

    /// Rebuilds the lookup table after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .category_order
            .iter()
            .enumerate()
            .map(|(k, c)| (c.clone(), k))
            .collect();
    }

    pub fn n_categories(&self) -> usize {
        self.category_order.len()
    }

    pub fn n_outputs(&self) -> usize {
        let n = self.n_categories();
        match self.method {
            EncodingMethod::OneHot => n,
            EncodingMethod::HelmertReverse => n - 1,
            EncodingMethod::Frequency => 1,
            EncodingMethod::Binary => binary_width(n),
        }
    }

    /// `<feature>__<method>_<k>` with 1-based `k`.
    pub fn column_names(&self) -> Vec<String> {
        (1..=self.n_outputs())
            .map(|k| format!("{}__{}_{}", self.feature, self.method, k))
            .collect()
    }

    /// Encoded row for a fitted category at 0-based position `i`.
    fn encode_index(&self, i: usize, out: &mut [f64]) {
        match self.method {
            EncodingMethod::OneHot => out[i] = 1.0,
            EncodingMethod::HelmertReverse => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = helmert_value(i, j + 1);
                }
            }
            EncodingMethod::Frequency => out[0] = self.frequencies[i],
            EncodingMethod::Binary => {
                let code = i + 1;
                let w = out.len();
                for (b, o) in out.iter_mut().enumerate() {
                    *o = f64::from(((code >> (w - 1 - b)) & 1) as u8);
                }
            }
        }
    }

    /// Encodes one category; `None` when it was not seen at fit time.
    pub fn encode(&self, category: &str) -> Option<Vec<f64>> {
        let i = self.lookup(category)?;
        let mut out = vec![0.0; self.n_outputs()];
        self.encode_index(i, &mut out);
        Some(out)
    }

    fn lookup(&self, category: &str) -> Option<usize> {
        if self.index.is_empty() {
            self.category_order.iter().position(|c| c == category)
        } else {
            self.index.get(category).copied()
        }
    }

    /// Encodes a column. Unseen categories become all-zero rows (0.0 for
    /// frequency) and are reported in [`Encoded::unseen_rows`].
    pub fn transform(&self, column: &[String]) -> Encoded {
        let width = self.n_outputs();
        let mut cols = vec![vec![0.0; column.len()]; width];
        let mut unseen_rows = Vec::new();
        let mut row = vec![0.0; width];
        for (r, value) in column.iter().enumerate() {
            match self.lookup(value) {
                Some(i) => {
                    row.iter_mut().for_each(|v| *v = 0.0);
                    self.encode_index(i, &mut row);
                    for (c, v) in cols.iter_mut().zip(&row) {
                        c[r] = *v;
                    }
                }
                None => unseen_rows.push(r),
            }
        }
        if !unseen_rows.is_empty() {
            log::warn!(
                "{} rows of {:?} hold categories unseen at fit time; encoded as zeros",
                unseen_rows.len(),
                self.feature
            );
        }
        let columns = if width == 0 {
            Matrix::empty(column.len())
        } else {
            Matrix::from_columns(cols).expect("encoded columns share one length")
        };
        Encoded {
            columns,
            names: self.column_names(),
            unseen_rows,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cats(values: &[&str]) -> Vec<String> {
        values.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_hot_matches_table() {
        let s = EncoderState::fit(EncodingMethod::OneHot, "c", &cats(&["a", "b", "c"])).unwrap();
        let e = s.transform(&cats(&["a", "b", "c"]));
        assert_eq!(e.columns.row(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(e.columns.row(1), vec![0.0, 1.0, 0.0]);
        assert_eq!(e.columns.row(2), vec![0.0, 0.0, 1.0]);
        assert_eq!(e.names, vec!["c__one_hot_1", "c__one_hot_2", "c__one_hot_3"]);
        let single = EncoderState::fit(EncodingMethod::OneHot, "c", &cats(&["z", "z"])).unwrap();
        assert_eq!(single.n_outputs(), 1);
    }

    #[test]
    fn helmert_follows_closed_form_and_rounds_to_table() {
        let s = EncoderState::fit(EncodingMethod::HelmertReverse, "c", &cats(&["1", "2", "3", "4"])).unwrap();
        assert_eq!(s.n_outputs(), 3);
        let expected = [
            [-1.0 / 2.0, -1.0 / 3.0, -1.0 / 4.0],
            [1.0 / 2.0, -1.0 / 3.0, -1.0 / 4.0],
            [0.0, 2.0 / 3.0, -1.0 / 4.0],
            [0.0, 0.0, 3.0 / 4.0],
        ];
        let table = [
            [-0.5, -0.33, -0.25],
            [0.5, -0.33, -0.25],
            [0.0, 0.66, -0.25],
            [0.0, 0.0, 0.75],
        ];
        for (i, c) in ["1", "2", "3", "4"].iter().enumerate() {
            let row = s.encode(c).unwrap();
            assert_eq!(row, expected[i].to_vec());
            for (v, t) in row.iter().zip(&table[i]) {
                // the printed table truncates to two decimals
                assert_eq!((v * 100.0).trunc() / 100.0, *t);
            }
        }
        // each contrast sums to zero over equally weighted categories
        for j in 0..3 {
            let sum: f64 = (0..4).map(|i| expected[i][j]).sum();
            assert!(sum.abs() < 1e-15);
        }
    }

    #[test]
    fn frequency_matches_table() {
        let mut col = vec!["1".to_string(); 25];
        col.extend(vec!["2".to_string(); 60]);
        col.extend(vec!["3".to_string(); 15]);
        let s = EncoderState::fit(EncodingMethod::Frequency, "f", &col).unwrap();
        assert_eq!(s.frequencies, vec![0.25, 0.60, 0.15]);
        let mut two = vec!["a".to_string(); 72];
        two.extend(vec!["b".to_string(); 28]);
        let s2 = EncoderState::fit(EncodingMethod::Frequency, "g", &two).unwrap();
        assert_eq!(s2.frequencies, vec![0.72, 0.28]);
        let e = s.transform(&cats(&["3", "9"]));
        assert_eq!(e.columns.column(0), &[0.15, 0.0]);
        assert_eq!(e.unseen_rows, vec![1]);
    }

    #[test]
    fn binary_matches_table() {
        let s = EncoderState::fit(EncodingMethod::Binary, "b", &cats(&["1", "2", "3"])).unwrap();
        assert_eq!(s.n_outputs(), 2);
        assert_eq!(s.encode("1").unwrap(), vec![0.0, 1.0]);
        assert_eq!(s.encode("2").unwrap(), vec![1.0, 0.0]);
        assert_eq!(s.encode("3").unwrap(), vec![1.0, 1.0]);
        assert_eq!(
            (binary_width(1), binary_width(4), binary_width(7), binary_width(8)),
            (1, 3, 3, 4)
        );
    }

    #[test]
    fn unseen_categories_become_zero_rows() {
        for m in [
            EncodingMethod::OneHot,
            EncodingMethod::HelmertReverse,
            EncodingMethod::Binary,
        ] {
            let s = EncoderState::fit(m, "c", &cats(&["a", "b", "c"])).unwrap();
            let e = s.transform(&cats(&["q"]));
            assert!(e.columns.row(0).iter().all(|v| *v == 0.0));
            assert_eq!(e.unseen_rows, vec![0]);
        }
        assert!(EncoderState::fit(EncodingMethod::OneHot, "c", &[]).is_err());
    }

    #[test]
    fn category_order_is_first_appearance() {
        let s = EncoderState::fit(EncodingMethod::OneHot, "c", &cats(&["z", "a", "z", "m"])).unwrap();
        assert_eq!(s.category_order, cats(&["z", "a", "m"]));
        let json = serde_json::to_string(&s).unwrap();
        let mut back: EncoderState = serde_json::from_str(&json).unwrap();
        back.reindex();
        assert_eq!(back.encode("m"), s.encode("m"));
    }

    /// Every one-category-vs-rest partition is reachable by a single
    /// threshold on one column under both one-hot and Helmert coding.
    #[test]
    fn one_hot_and_helmert_partitions_coincide() {
        for n in 2..=5usize {
            let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
            let helmert = EncoderState::fit(EncodingMethod::HelmertReverse, "c", &names).unwrap();
            let onehot = EncoderState::fit(EncodingMethod::OneHot, "c", &names).unwrap();
            let partitions = |s: &EncoderState| {
                let rows: Vec<Vec<f64>> = names.iter().map(|c| s.encode(c).unwrap()).collect();
                let mut out = std::collections::BTreeSet::new();
                for j in 0..s.n_outputs() {
                    let mut vals: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                    vals.sort_by(f64::total_cmp);
                    vals.dedup();
                    for w in vals.windows(2) {
                        let t = (w[0] + w[1]) / 2.0;
                        let left: Vec<bool> = rows.iter().map(|r| r[j] < t).collect();
                        out.insert(left);
                    }
                }
                out
            };
            let (oh, hm) = (partitions(&onehot), partitions(&helmert));
            for k in 0..n {
                let single: Vec<bool> = (0..n).map(|i| i != k).collect();
                let flipped: Vec<bool> = single.iter().map(|b| !b).collect();
                let found =
                    |set: &std::collections::BTreeSet<Vec<bool>>| set.contains(&single) || set.contains(&flipped);
                assert!(found(&oh) && found(&hm), "category {k} of {n}");
            }
        }
    }
}
