//! `prepbench` command line: generate, run, report, ingest.
//!
//! Successful commands print one JSON line on stdout. Failures print one
//! JSON line `{"error": {"kind": ..., "message": ...}}` on stderr and exit
//! with 1; usage errors print clap's usage text and exit with 2.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::synthdata::{generate_dataset, oracle_auc, DatasetSpec};

use super::{ingest_csv, report_dir, run_experiment, CleaningRules, ExperimentConfig};

/// Caps the worker pool when set to a positive integer.
pub const THREADS_ENV: &str = "PREPBENCH_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "prepbench",
    version,
    about = "Synthetic benchmarks for tabular preprocessing ahead of boosted trees"
)]
struct Cli {
    /// Overrides the master seed (run) or dataset seed (generate).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one dataset from a spec JSON file.
    Generate {
        spec: PathBuf,
        dir: PathBuf,
        /// File stem for the CSV and manifest (default: the spec's stem).
        #[arg(long)]
        stem: Option<String>,
    },
    /// Run an experiment config and write its run directory.
    Run { config: PathBuf },
    /// Regenerate summary, rankings and plots of a run directory.
    Report { run_dir: PathBuf },
    /// Clean a CSV with a rules JSON file and save it as a dataset.
    Ingest {
        csv: PathBuf,
        rules: PathBuf,
        dir: PathBuf,
        #[arg(long)]
        stem: Option<String>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string()
}

fn configure_threads() {
    let Ok(value) = std::env::var(THREADS_ENV) else { return };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // Fails only if the pool already exists, e.g. on a second call.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => log::warn!("ignoring {THREADS_ENV}={value:?}"),
    }
}

fn execute(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Generate { spec, dir, stem } => {
            let mut s: DatasetSpec = read_json(&spec)?;
            if let Some(seed) = cli.seed {
                s.seed = seed;
            }
            let dataset = generate_dataset(&s)?;
            let (csv, manifest) = dataset.save(&dir, &stem.unwrap_or_else(|| stem_of(&spec)))?;
            let oracle = match &dataset.true_probability {
                Some(p) => Some(oracle_auc(p, &dataset.labels)?),
                None => None,
            };
            Ok(json!({
                "csv": csv,
                "manifest": manifest,
                "rows": dataset.n_rows(),
                "class_balance": dataset.class_balance(),
                "oracle_auc": oracle,
            }))
        }
        Command::Run { config } => {
            let mut c = ExperimentConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                c.master_seed = seed;
            }
            let log = run_experiment(&c)?;
            let failures = log.runs.iter().filter(|r| !r.succeeded()).count();
            Ok(json!({
                "run_dir": c.output_dir,
                "runs": log.runs.len(),
                "failures": failures,
            }))
        }
        Command::Report { run_dir } => {
            let files = report_dir(&run_dir)?;
            Ok(json!({
                "runs": files.runs,
                "summary": files.summary,
                "rankings": files.rankings,
                "plots": files.plots,
            }))
        }
        Command::Ingest { csv, rules, dir, stem } => {
            let r: CleaningRules = read_json(&rules)?;
            let dataset: Dataset = ingest_csv(&csv, &r)?;
            let (path, manifest) = dataset.save(&dir, &stem.unwrap_or_else(|| stem_of(&csv)))?;
            Ok(json!({
                "csv": path,
                "manifest": manifest,
                "rows": dataset.n_rows(),
                "numeric_columns": dataset.n_features(),
                "categorical_columns": dataset.categorical.len(),
                "dropped_columns": dataset.manifest.dropped_columns,
                "skipped_rows": dataset.manifest.skipped_rows,
            }))
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(args) {
        Ok(p) => p,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(parsed) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", json!({"error": {"kind": e.kind(), "message": e.to_string()}}));
            1
        }
    }
}
