//! Fit each imputer on data with injected nulls and report its fill values
//! and downstream AUC.

use prepbench::bench::{run_arm_iteration, Arm, PipelineSettings};
use prepbench::gbtree::BoostConfig;
use prepbench::nullimp::{ImputeMethod, ImputerConfig, ImputerState};
use prepbench::synthdata::{preset, Catalog, CatalogCounts, DatasetRole, Experiment, Family};

fn main() -> prepbench::Result<()> {
    let mut base = preset(Experiment::NullImputation, Family::Linear);
    base.n_rows = 5_000;
    let catalog = Catalog::new(Experiment::NullImputation, base, 9, CatalogCounts::DESK)?;
    let train = catalog.generate(DatasetRole::Train, 0)?;
    let validation = catalog.generate(DatasetRole::Validation, 0)?;
    let nulled: Vec<&str> = train
        .features
        .columns()
        .iter()
        .zip(&train.feature_names)
        .filter(|(c, _)| c.iter().any(|v| v.is_nan()))
        .map(|(_, n)| n.as_str())
        .collect();
    println!("columns with nulls: {}", nulled.join(", "));

    let model = BoostConfig {
        n_estimators: 80,
        learning_rate: 0.1,
        max_depth: 4,
        ..BoostConfig::default()
    };
    for method in ImputeMethod::ALL {
        let state = ImputerState::fit(method, &train.features, Some(&train.labels), &ImputerConfig::default())?;
        let fills: Vec<String> = state
            .fills
            .iter()
            .zip(&train.feature_names)
            .filter(|(_, n)| nulled.contains(&n.as_str()))
            .map(|(f, n)| format!("{n}={f:.3}"))
            .collect();
        let out = run_arm_iteration(
            Arm::Impute(method),
            &train,
            &validation,
            &model,
            &PipelineSettings::default(),
            0,
        )?;
        println!(
            "{:<18} test AUC {:.4}  fills {}",
            method.as_str(),
            out.test_auc,
            fills.join(" ")
        );
    }
    Ok(())
}
