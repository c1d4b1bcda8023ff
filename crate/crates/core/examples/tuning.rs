//! Bayesian search over the boosted model's hyperparameters.

use prepbench::gbtree::{fit, BoostConfig};
use prepbench::metrics::auc;
use prepbench::synthdata::{generate_dataset, preset, Experiment, Family};
use prepbench::tune::{optimize, SearchSpace};

fn main() -> prepbench::Result<()> {
    let mut spec = preset(Experiment::CategoricalEncoding, Family::GamGlobal);
    spec.n_rows = 3_000;
    spec.n_segments = 0;
    spec.form.variant = prepbench::synthdata::Variant::Base;
    let data = generate_dataset(&spec)?;
    let cut = data.n_rows() * 3 / 4;
    let train = data.select_rows(&(0..cut).collect::<Vec<_>>());
    let valid = data.select_rows(&(cut..data.n_rows()).collect::<Vec<_>>());

    let space = SearchSpace {
        n_estimators: (20, 150),
        max_depth: (2, 6),
        ..SearchSpace::default()
    };
    let objective = |c: &BoostConfig| {
        let model = fit(c, &train.features, &train.labels)?;
        auc(&model.predict_proba(&valid.features)?, &valid.labels)
    };
    let result = optimize(&space, &BoostConfig::default(), objective, 12, 4)?;
    for (i, t) in result.trials.iter().enumerate() {
        let c = &t.config;
        println!(
            "{i:>2}  trees {:>3} depth {:>2} lr {:.3} gamma {:.2}  AUC {}",
            c.n_estimators,
            c.max_depth,
            c.learning_rate,
            c.gamma,
            t.score.map(|s| format!("{s:.4}")).unwrap_or_else(|| "failed".into())
        );
    }
    println!("best AUC {:.4} with {:?}", result.best_score, result.best_config);
    Ok(())
}
