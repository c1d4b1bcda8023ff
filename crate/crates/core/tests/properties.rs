use approx::assert_relative_eq;
use proptest::prelude::*;

use prepbench::catenc::{EncoderState, EncodingMethod};
use prepbench::gbtree::{fit, BoostConfig};
use prepbench::matrix::Matrix;
use prepbench::metrics::{auc, summarize};
use prepbench::nullimp::{ImputeMethod, ImputerConfig, ImputerState};
use prepbench::standardize::Standardizer;

fn labelled(raw: &[(f64, bool)]) -> (Vec<f64>, Vec<u8>) {
    (
        raw.iter().map(|r| r.0).collect(),
        raw.iter().map(|r| u8::from(r.1)).collect(),
    )
}

fn both_classes(raw: &[(f64, bool)]) -> bool {
    raw.iter().any(|r| r.1) && raw.iter().any(|r| !r.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn auc_ignores_increasing_transforms(
        raw in proptest::collection::vec((-4.0f64..4.0, any::<bool>()), 2..60)
    ) {
        prop_assume!(both_classes(&raw));
        let (s, y) = labelled(&raw);
        let warped: Vec<f64> = s.iter().map(|v| v.powi(3) + v.exp()).collect();
        prop_assert_eq!(auc(&s, &y).unwrap(), auc(&warped, &y).unwrap());
    }

    #[test]
    fn negating_scores_mirrors_auc(
        raw in proptest::collection::vec((-4.0f64..4.0, any::<bool>()), 2..60)
    ) {
        prop_assume!(both_classes(&raw));
        let (s, y) = labelled(&raw);
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        assert_relative_eq!(auc(&s, &y).unwrap() + auc(&neg, &y).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn summary_ignores_order(mut values in proptest::collection::vec(0.0f64..1.0, 1..30)) {
        let a = summarize(&values).unwrap();
        values.reverse();
        let b = summarize(&values).unwrap();
        assert_relative_eq!(a.mean, b.mean, epsilon = 1e-12);
        assert_relative_eq!(a.std, b.std, epsilon = 1e-12);
        prop_assert!(a.lower <= a.mean && a.mean <= a.upper);
    }

    #[test]
    fn imputed_features_are_complete(
        cells in proptest::collection::vec(proptest::option::weighted(0.7, -10.0f64..10.0), 80),
        labels in proptest::collection::vec(0u8..2, 40),
        method_index in 0usize..6,
    ) {
        let method = ImputeMethod::ALL[method_index];
        let columns: Vec<Vec<f64>> = cells
            .chunks(40)
            .map(|c| c.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect();
        prop_assume!(columns.iter().all(|c| c.iter().any(|v| !v.is_nan())));
        let x = Matrix::from_columns(columns).unwrap();
        let state = ImputerState::fit(method, &x, Some(&labels), &ImputerConfig::default()).unwrap();
        let out = state.transform(&x).unwrap();
        prop_assert_eq!(out.n_rows(), 40);
        prop_assert_eq!(out.count_missing(), 0);
        prop_assert!(out.columns().iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn one_hot_rows_have_a_single_one(
        column in proptest::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 1..50)
    ) {
        let column: Vec<String> = column.into_iter().map(String::from).collect();
        let state = EncoderState::fit(EncodingMethod::OneHot, "seg", &column).unwrap();
        let encoded = state.transform(&column);
        prop_assert_eq!(encoded.columns.n_cols(), state.n_categories());
        for i in 0..column.len() {
            let row = encoded.columns.row(i);
            prop_assert_eq!(row.iter().filter(|v| **v == 1.0).count(), 1);
            prop_assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn distinct_categories_get_distinct_codes(
        column in proptest::collection::vec(0u8..12, 1..60),
        method_index in 0usize..4,
    ) {
        let method = EncodingMethod::ALL[method_index];
        prop_assume!(method != EncodingMethod::Frequency);
        let column: Vec<String> = column.iter().map(|c| format!("c{c}")).collect();
        let state = EncoderState::fit(method, "seg", &column).unwrap();
        let codes: Vec<Vec<f64>> = state
            .category_order
            .iter()
            .map(|c| state.encode(c).unwrap())
            .collect();
        for i in 0..codes.len() {
            for j in i + 1..codes.len() {
                prop_assert_ne!(&codes[i], &codes[j]);
            }
        }
    }

    #[test]
    fn standardized_columns_are_centred(
        column in proptest::collection::vec(-100.0f64..100.0, 3..50)
    ) {
        let x = Matrix::from_columns(vec![column]).unwrap();
        let (state, z) = Standardizer::fit_transform(&x).unwrap();
        if state.stds[0].is_some() {
            let n = z.n_rows() as f64;
            let mean = z.column(0).iter().sum::<f64>() / n;
            let var = z.column(0).iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            assert_relative_eq!(mean, 0.0, epsilon = 1e-9);
            assert_relative_eq!(var, 1.0, epsilon = 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn boosted_predictions_ignore_increasing_feature_transforms(
        rows in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, any::<bool>()), 20..80)
    ) {
        let labels: Vec<u8> = rows.iter().map(|r| u8::from(r.2)).collect();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let x = Matrix::from_columns(vec![
            rows.iter().map(|r| r.0).collect(),
            rows.iter().map(|r| r.1).collect(),
        ])
        .unwrap();
        let warped = Matrix::from_columns(vec![
            rows.iter().map(|r| 2.0 * r.0 + 7.0).collect(),
            rows.iter().map(|r| r.1.exp()).collect(),
        ])
        .unwrap();
        let config = BoostConfig { n_estimators: 8, max_depth: 3, ..BoostConfig::default() };
        let p = fit(&config, &x, &labels).unwrap().predict_proba(&x).unwrap();
        let q = fit(&config, &warped, &labels).unwrap().predict_proba(&warped).unwrap();
        prop_assert_eq!(p, q);
    }
}
