//! Run a small feature-selection experiment end to end and print the
//! summary table it writes.

use prepbench::bench::{run_experiment, ExperimentConfig};
use prepbench::synthdata::{Experiment, Family};
use prepbench::tune::SearchSpace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("prepbench-run");
    let mut config = ExperimentConfig::new(
        Experiment::FeatureSelection,
        Family::Linear,
        &["pearson", "lasso", "xgb_gain"],
        &out,
    );
    config.dataset.n_rows = Some(3_000);
    config.iterations = 3;
    config.tuning_budget = 6;
    config.search_space = SearchSpace {
        n_estimators: (30, 120),
        max_depth: (2, 5),
        ..SearchSpace::default()
    };
    let log = run_experiment(&config)?;
    for method in &log.methods {
        let aucs = log.test_aucs(method);
        println!(
            "{method:<10} test AUC {:?}",
            aucs.iter().map(|a| (a * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
    }
    let summary = std::fs::read_to_string(out.join("summary.csv"))?;
    print!("{summary}");
    println!("artifacts in {}", out.display());
    Ok(())
}
