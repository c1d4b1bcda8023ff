//! Rank the features of a grouped dataset with every selector and show how
//! many noise columns each one keeps.

use prepbench::featsel::{select, SelectionMethod, SelectorConfig};
use prepbench::gbtree::BoostConfig;
use prepbench::standardize::Standardizer;
use prepbench::synthdata::{generate_dataset, preset, Experiment, Family};

fn main() -> prepbench::Result<()> {
    let mut spec = preset(Experiment::FeatureSelection, Family::JumpyGamLocal);
    spec.n_rows = 4_000;
    spec.seed = 3;
    let data = generate_dataset(&spec)?;
    let (_, x) = Standardizer::fit_transform(&data.features)?;
    let config = SelectorConfig {
        boost: BoostConfig {
            n_estimators: 40,
            max_depth: 4,
            ..BoostConfig::default()
        },
        ..SelectorConfig::default()
    };
    let keep = data.signal_indices().len();
    let noise = data.noise_indices();
    for method in SelectionMethod::ALL {
        let result = select(method, &x, &data.labels, keep, &config, 1)?;
        let kept_noise = result.selected.iter().filter(|j| noise.contains(j)).count();
        let top: Vec<&str> = result
            .selected
            .iter()
            .take(4)
            .map(|&j| data.feature_names[j].as_str())
            .collect();
        println!(
            "{:<12} keeps {:>2} ({kept_noise} noise)  top: {}{}",
            method.as_str(),
            result.selected.len(),
            top.join(" "),
            result.lambda.map(|l| format!("  lambda {l}")).unwrap_or_default()
        );
    }
    Ok(())
}
