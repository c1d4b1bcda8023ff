//! Encode a segment column four ways and fit the same model on each.

use prepbench::bench::{run_arm_iteration, Arm, PipelineSettings};
use prepbench::catenc::{EncoderState, EncodingMethod};
use prepbench::gbtree::BoostConfig;
use prepbench::synthdata::{preset, Catalog, CatalogCounts, DatasetRole, Experiment, Family};

fn main() -> prepbench::Result<()> {
    let mut base = preset(Experiment::CategoricalEncoding, Family::JumpyGamLocal);
    base.n_rows = 5_000;
    let catalog = Catalog::new(Experiment::CategoricalEncoding, base, 5, CatalogCounts::DESK)?;
    let train = catalog.generate(DatasetRole::Train, 0)?;
    let validation = catalog.generate(DatasetRole::Validation, 0)?;

    let segment = &train.categorical[0];
    let model = BoostConfig {
        n_estimators: 80,
        learning_rate: 0.1,
        max_depth: 4,
        ..BoostConfig::default()
    };
    for method in EncodingMethod::ALL {
        let encoder = EncoderState::fit(method, &segment.name, &segment.values)?;
        let first = &encoder.category_order[0];
        let out = run_arm_iteration(
            Arm::Encode(method),
            &train,
            &validation,
            &model,
            &PipelineSettings::default(),
            0,
        )?;
        println!(
            "{:<10} {} columns, {:?} -> {:?}, train AUC {:.4}, test AUC {:.4}",
            method.as_str(),
            encoder.n_outputs(),
            first,
            encoder.encode(first).unwrap_or_default(),
            out.train_auc,
            out.test_auc
        );
    }
    Ok(())
}
