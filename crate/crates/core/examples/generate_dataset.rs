//! Generate one dataset per synthetic family and compare their ceilings.

use prepbench::synthdata::{generate_dataset, oracle_auc, DatasetSpec, Family, FunctionalForm, NullInjection, Variant};

fn main() -> prepbench::Result<()> {
    let dir = std::env::temp_dir().join("prepbench-generate");
    for family in Family::ALL {
        let form = FunctionalForm::new(family, Variant::Base);
        let spec = DatasetSpec {
            form,
            n_rows: 5_000,
            n_signal_features: form.n_features(),
            n_noise_features: 3,
            n_segments: 4,
            pair_correlation: 0.5,
            null_inject: Some(NullInjection {
                feature_count: 2,
                rate: 0.2,
            }),
            seed: 11,
            coefficient_seed: None,
        };
        let data = generate_dataset(&spec)?;
        let oracle = oracle_auc(data.true_probability.as_deref().unwrap_or_default(), &data.labels)?;
        let (csv, _) = data.save(&dir, family.as_str())?;
        println!(
            "{:<16} {} rows x {} numeric, positives {:.3}, missing cells {}, oracle AUC {:.4} -> {}",
            family.as_str(),
            data.n_rows(),
            data.n_features(),
            data.class_balance(),
            data.features.count_missing(),
            oracle,
            csv.display()
        );
    }
    Ok(())
}
