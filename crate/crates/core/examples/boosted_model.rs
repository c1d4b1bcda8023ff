//! Fit the boosted tree classifier on a synthetic dataset and inspect
//! held-out AUC, importances and the first tree.

use std::time::Instant;

use prepbench::gbtree::{fit, BoostConfig, ImportanceKind};
use prepbench::metrics::auc;
use prepbench::synthdata::{generate_dataset, oracle_auc, preset, Experiment, Family};

fn main() -> prepbench::Result<()> {
    let mut spec = preset(Experiment::FeatureSelection, Family::Linear);
    spec.seed = 7;
    let data = generate_dataset(&spec)?;
    let half = data.n_rows() / 2;
    let train = data.select_rows(&(0..half).collect::<Vec<_>>());
    let test = data.select_rows(&(half..data.n_rows()).collect::<Vec<_>>());

    let config = BoostConfig {
        n_estimators: 100,
        learning_rate: 0.1,
        max_depth: 4,
        ..BoostConfig::default()
    };
    let start = Instant::now();
    let model = fit(&config, &train.features, &train.labels)?;
    println!("fit {} trees in {:.2?}", model.trees.len(), start.elapsed());

    let p = model.predict_proba(&test.features)?;
    let oracle = oracle_auc(test.true_probability.as_deref().unwrap_or_default(), &test.labels)?;
    println!("test AUC {:.4}  oracle AUC {:.4}", auc(&p, &test.labels)?, oracle);

    let gain = model.importance(ImportanceKind::Gain);
    let mut order: Vec<usize> = (0..gain.len()).collect();
    order.sort_by(|&a, &b| gain[b].total_cmp(&gain[a]));
    for &j in order.iter().take(5) {
        println!(
            "{:>10}  gain {:9.2}  splits {}",
            train.feature_names[j], gain[j], model.split_count[j]
        );
    }
    let dump = model.dump_json()?;
    println!("tree dump: {} bytes", dump.len());
    Ok(())
}
