use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{write_atomic, Dataset};
use crate::error::{Error, Result};
use crate::gbtree::{fit, BoostConfig, BoostedModel};
use crate::metrics::{auc, auc_gap};
use crate::rng::{derive_seed, stream};
use crate::synthdata::{oracle_auc, Catalog, DatasetRole, Experiment, Family};
use crate::tune::{optimize, SearchSpace, TuneResult};

use super::config::TUNING_TRAIN_SHARE;
use super::pipeline::{prepare, ArmManifest};
use super::report::{report, RUNS_FILE};
use super::{Arm, ExperimentConfig, PipelineSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for Failure {
    fn from(e: &Error) -> Self {
        Failure {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

/// One arm on one iteration. AUC fields are `None` when the arm failed;
/// `oracle_auc` is also `None` for data without true probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub method: String,
    pub iteration: usize,
    pub train_dataset: String,
    pub validation_dataset: String,
    pub train_auc: Option<f64>,
    pub test_auc: Option<f64>,
    pub oracle_auc: Option<f64>,
    pub auc_gap: Option<f64>,
    pub model: Option<BoostConfig>,
    pub manifest: Option<ArmManifest>,
    pub wall_time_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

impl RunResult {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    /// Number of model input columns, when the arm succeeded.
    pub fn n_columns(&self) -> Option<usize> {
        self.manifest.as_ref().map(|m| m.columns.len())
    }
}

/// Everything a run writes to `runs.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub master_seed: u64,
    /// Method ids in arm order, control first.
    pub methods: Vec<String>,
    pub runs: Vec<RunResult>,
}

impl RunLog {
    /// Successful runs of `method`, in iteration order.
    pub fn successes<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a RunResult> + 'a {
        self.runs.iter().filter(move |r| r.method == method && r.succeeded())
    }

    /// Test AUCs of `method`'s successful runs.
    pub fn test_aucs(&self, method: &str) -> Vec<f64> {
        self.successes(method).filter_map(|r| r.test_auc).collect()
    }
}

/// A fitted arm with its predictions, for callers that need more than the
/// summary numbers.
#[derive(Debug, Clone)]
pub struct ArmOutcome {
    pub manifest: ArmManifest,
    pub model: BoostedModel,
    pub train_predictions: Vec<f64>,
    pub validation_predictions: Vec<f64>,
    pub train_auc: f64,
    pub test_auc: f64,
    pub oracle_auc: Option<f64>,
}

/// Prepares `train`/`validation` for `arm`, fits `model` and scores both.
pub fn run_arm_iteration(
    arm: Arm,
    train: &Dataset,
    validation: &Dataset,
    model: &BoostConfig,
    settings: &PipelineSettings,
    seed: u64,
) -> Result<ArmOutcome> {
    let prepared = prepare(arm, train, validation, settings, seed)?;
    let fitted = fit(model, &prepared.train, &train.labels)?;
    let train_predictions = fitted.predict_proba(&prepared.train)?;
    let validation_predictions = fitted.predict_proba(&prepared.validation)?;
    let train_auc = auc(&train_predictions, &train.labels)?;
    let test_auc = auc(&validation_predictions, &validation.labels)?;
    let oracle_auc = validation
        .true_probability
        .as_ref()
        .map(|p| oracle_auc(p, &validation.labels))
        .transpose()?;
    Ok(ArmOutcome {
        manifest: prepared.manifest,
        model: fitted,
        train_predictions,
        validation_predictions,
        train_auc,
        test_auc,
        oracle_auc,
    })
}

/// Tunes the model for `arm` on a fixed 75/25 split of `tuning`. The
/// split, the pipeline seed and the tuner seed depend only on `seed`, so
/// every arm faces the same search.
pub fn tune_arm(
    arm: Arm,
    tuning: &Dataset,
    space: &SearchSpace,
    base: &BoostConfig,
    budget: usize,
    settings: &PipelineSettings,
    seed: u64,
) -> Result<TuneResult> {
    let n = tuning.n_rows();
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut stream(seed, "tuning_split", 0));
    let cut = ((n as f64) * TUNING_TRAIN_SHARE).round() as usize;
    if cut == 0 || cut == n {
        return Err(Error::Tuning(format!(
            "tuning dataset of {n} rows is too small to split"
        )));
    }
    let (a, b) = rows.split_at(cut);
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_unstable();
    b.sort_unstable();
    let fit_part = tuning.select_rows(&a);
    let score_part = tuning.select_rows(&b);
    let prepared = prepare(
        arm,
        &fit_part,
        &score_part,
        settings,
        derive_seed(seed, "tuning_pipeline", 0),
    )?;
    let objective = |config: &BoostConfig| {
        let model = fit(config, &prepared.train, &fit_part.labels)?;
        auc(&model.predict_proba(&prepared.validation)?, &score_part.labels)
    };
    optimize(space, base, objective, budget, derive_seed(seed, "tuner", 0))
}

struct Inputs {
    tuning: Dataset,
    train: Vec<(String, Dataset)>,
    validation: Vec<(String, Dataset)>,
    catalog: Option<Catalog>,
}

fn load_inputs(config: &ExperimentConfig) -> Result<Inputs> {
    match &config.data {
        Some(data) => {
            let named = |p: &Path| -> Result<(String, Dataset)> {
                let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_string();
                Ok((name, Dataset::load(p)?))
            };
            let train = data.train[..config.iterations]
                .par_iter()
                .map(|p| named(p))
                .collect::<Result<_>>()?;
            let validation = data.validation.par_iter().map(|p| named(p)).collect::<Result<_>>()?;
            Ok(Inputs {
                tuning: Dataset::load(&data.tuning)?,
                train,
                validation,
                catalog: None,
            })
        }
        None => {
            let catalog = Catalog::new(
                config.experiment,
                config.base_spec()?,
                config.master_seed,
                config.catalog_counts(),
            )?;
            let build = |role: DatasetRole, count: usize| -> Result<Vec<(String, Dataset)>> {
                (0..count)
                    .into_par_iter()
                    .map(|i| Ok((format!("{}_{i:02}", role.as_str()), catalog.generate(role, i)?)))
                    .collect()
            };
            let train = build(DatasetRole::Train, config.iterations)?;
            let validation = build(DatasetRole::Validation, config.validation_datasets)?;
            Ok(Inputs {
                tuning: catalog.generate(DatasetRole::Tuning, 0)?,
                train,
                validation,
                catalog: Some(catalog),
            })
        }
    }
}

fn save_inputs(inputs: &Inputs, dir: &Path, with_rows: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if let Some(catalog) = &inputs.catalog {
        write_atomic(&dir.join("catalog.json"), &serde_json::to_vec_pretty(catalog)?)?;
    }
    let all = inputs
        .train
        .iter()
        .chain(&inputs.validation)
        .map(|(n, d)| (n.as_str(), d))
        .chain(std::iter::once(("tuning_00", &inputs.tuning)));
    for (name, dataset) in all {
        if with_rows {
            dataset.save(dir, name)?;
        } else {
            let manifest = serde_json::to_vec_pretty(&dataset.full_manifest())?;
            write_atomic(&dir.join(format!("{name}.json")), &manifest)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TuningRecord<'a> {
    method: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<&'a TuneResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<Failure>,
}

/// Runs every arm on every iteration and writes the run directory
/// (`datasets/`, `tuning/`, `runs.json`, `summary.csv`, `plots/`).
///
/// Nothing is written until the config has been validated and all input
/// datasets have been built. A failing arm-iteration is recorded and the
/// experiment carries on.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunLog> {
    config.validate()?;
    let arms = config.arms()?;
    let inputs = load_inputs(config)?;
    let out = &config.output_dir;
    save_inputs(&inputs, &out.join("datasets"), config.persist_datasets)?;

    let seed = config.master_seed;
    let settings = &config.pipeline;
    let tuned: Vec<Result<TuneResult>> = arms
        .par_iter()
        .map(|&arm| {
            tune_arm(
                arm,
                &inputs.tuning,
                &config.search_space,
                &config.base_model,
                config.tuning_budget,
                settings,
                seed,
            )
        })
        .collect();
    let tuning_dir = out.join("tuning");
    for (arm, t) in arms.iter().zip(&tuned) {
        let record = TuningRecord {
            method: arm.id(),
            result: t.as_ref().ok(),
            failure: t.as_ref().err().map(Failure::from),
        };
        if let Err(e) = t {
            log::warn!("tuning {arm} failed: {e}");
        }
        write_atomic(
            &tuning_dir.join(format!("{}.json", arm.id())),
            &serde_json::to_vec_pretty(&record)?,
        )?;
    }

    let jobs: Vec<(usize, usize)> = (0..arms.len())
        .flat_map(|a| (0..config.iterations).map(move |i| (a, i)))
        .collect();
    let runs: Vec<RunResult> = jobs
        .par_iter()
        .map(|&(a, it)| {
            let arm = arms[a];
            let (train_name, train) = &inputs.train[it];
            let (val_name, validation) = &inputs.validation[it % inputs.validation.len()];
            let start = Instant::now();
            let mut result = RunResult {
                method: arm.id().to_string(),
                iteration: it,
                train_dataset: train_name.clone(),
                validation_dataset: val_name.clone(),
                train_auc: None,
                test_auc: None,
                oracle_auc: None,
                auc_gap: None,
                model: None,
                manifest: None,
                wall_time_secs: 0.0,
                failure: None,
            };
            let tuned = match &tuned[a] {
                Ok(t) => t,
                Err(e) => {
                    result.failure = Some(Failure::from(e));
                    return result;
                }
            };
            let pipeline_seed = derive_seed(seed, "pipeline", it as u64);
            match run_arm_iteration(arm, train, validation, &tuned.best_config, settings, pipeline_seed) {
                Ok(o) => {
                    result.train_auc = Some(o.train_auc);
                    result.test_auc = Some(o.test_auc);
                    result.oracle_auc = o.oracle_auc;
                    result.auc_gap = Some(auc_gap(o.train_auc, o.test_auc));
                    result.model = Some(tuned.best_config);
                    result.manifest = Some(o.manifest);
                }
                Err(e) => {
                    log::warn!("{arm} iteration {it} failed: {e}");
                    result.failure = Some(Failure::from(&e));
                }
            }
            result.wall_time_secs = start.elapsed().as_secs_f64();
            result
        })
        .collect();

    let log = RunLog {
        experiment: config.experiment,
        family: if config.data.is_some() { None } else { config.family },
        master_seed: seed,
        methods: arms.iter().map(|a| a.id().to_string()).collect(),
        runs,
    };
    write_atomic(&out.join(RUNS_FILE), &serde_json::to_vec_pretty(&log)?)?;
    if log.runs.iter().any(RunResult::succeeded) {
        report(&log, out)?;
    } else {
        log::warn!("every arm failed; only runs.json was written");
    }
    Ok(log)
}
