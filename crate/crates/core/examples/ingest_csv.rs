//! Clean a small loan-style CSV into a dataset: drop identifier and leakage
//! columns, map the status column to labels, keep categoricals.

use std::io::Write;

use prepbench::bench::{ingest_csv, CleaningRules};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("prepbench-ingest");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("loans.csv");
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "id,loan_amnt,int_rate,grade,emp_length,total_rec_prncp,loan_status")?;
    let statuses = ["Fully Paid", "Charged Off", "Current", "Fully Paid"];
    for i in 0..400 {
        let emp = if i % 9 == 0 {
            String::new()
        } else {
            format!("{} years", i % 11)
        };
        writeln!(
            f,
            "{i},{},{:.2},{},{emp},{},{}",
            5_000 + 37 * i,
            6.0 + (i % 23) as f64 * 0.7,
            ["A", "B", "C", "D"][i % 4],
            i * 11,
            statuses[i % 4]
        )?;
    }
    drop(f);

    let mut rules = CleaningRules::new("loan_status", "Charged Off");
    rules.negative_labels = vec!["Fully Paid".into()];
    rules.identity_columns = vec!["id".into()];
    rules.leakage_columns = vec!["total_rec_prncp".into()];
    let data = ingest_csv(&path, &rules)?;
    println!("rows kept {}, skipped {}", data.n_rows(), data.manifest.skipped_rows);
    println!("numeric {:?}", data.feature_names);
    println!(
        "categorical {:?}",
        data.categorical.iter().map(|c| &c.name).collect::<Vec<_>>()
    );
    for d in &data.manifest.dropped_columns {
        println!("dropped {} ({})", d.name, d.reason);
    }
    println!("positive rate {:.3}", data.class_balance());
    Ok(())
}
