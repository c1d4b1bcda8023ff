use prepbench::bench::{read_run_log, run_experiment, ExperimentConfig, RunLog};
use prepbench::synthdata::{Experiment, Family};
use prepbench::tune::SearchSpace;

fn tiny(experiment: Experiment, family: Family, methods: &[&str], out: &std::path::Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(experiment, family, methods, out);
    c.dataset.n_rows = Some(600);
    c.iterations = 2;
    c.tuning_budget = 2;
    c.search_space = SearchSpace {
        n_estimators: (10, 30),
        max_depth: (2, 3),
        ..SearchSpace::default()
    };
    c
}

fn strip_timing(log: &RunLog) -> serde_json::Value {
    let mut v = serde_json::to_value(log).unwrap();
    for run in v["runs"].as_array_mut().unwrap() {
        run.as_object_mut().unwrap().remove("wall_time_secs");
    }
    v
}

#[test]
fn imputers_agree_when_nothing_is_missing() {
    let tmp = tempfile::tempdir().unwrap();
    let methods = ["median", "missing_indicator", "decile", "cluster", "tree"];
    let mut c = tiny(Experiment::NullImputation, Family::Linear, &methods, tmp.path());
    c.dataset.null_rate = Some(0.0);
    let log = run_experiment(&c).unwrap();
    assert_eq!(log.methods[0], "mean");
    assert_eq!(log.runs.len(), 12);
    let control = log.test_aucs("mean");
    assert_eq!(control.len(), 2);
    for m in methods {
        assert_eq!(log.test_aucs(m), control, "{m}");
    }
}

#[test]
fn one_failing_arm_does_not_stop_the_others() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = tiny(
        Experiment::NullImputation,
        Family::Linear,
        &["missing_indicator", "median"],
        tmp.path(),
    );
    // Standardized features straddle zero, so a zero sentinel collides.
    c.pipeline.imputer.sentinel = 0.0;
    let log = run_experiment(&c).unwrap();
    let failed: Vec<_> = log.runs.iter().filter(|r| !r.succeeded()).collect();
    assert_eq!(failed.len(), 2);
    assert!(failed.iter().all(|r| r.method == "missing_indicator"));
    assert!(failed.iter().all(|r| r.test_auc.is_none()));
    assert_eq!(log.successes("median").count(), 2);
    assert_eq!(log.successes("mean").count(), 2);

    let summary = std::fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    let row = summary.lines().find(|l| l.starts_with("missing_indicator,")).unwrap();
    assert!(row.starts_with("missing_indicator,2,2,,"), "{row}");
    assert!(tmp.path().join("tuning/missing_indicator.json").exists());
}

#[test]
fn replaying_a_config_reproduces_the_log() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |dir: &std::path::Path| {
        let c = tiny(
            Experiment::FeatureSelection,
            Family::GamGlobal,
            &["pearson", "lasso"],
            dir,
        );
        run_experiment(&c).unwrap();
        read_run_log(dir).unwrap()
    };
    let (first, second) = (run(a.path()), run(b.path()));
    assert_eq!(strip_timing(&first), strip_timing(&second));
    assert_eq!(
        std::fs::read(a.path().join("summary.csv")).unwrap().len(),
        std::fs::read(b.path().join("summary.csv")).unwrap().len()
    );
    assert!(a.path().join("rankings.csv").exists());
}

#[test]
fn changing_the_master_seed_changes_the_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut c = tiny(Experiment::CategoricalEncoding, Family::Linear, &["binary"], a.path());
    let first = run_experiment(&c).unwrap();
    c.master_seed += 1;
    c.output_dir = b.path().to_path_buf();
    let second = run_experiment(&c).unwrap();
    assert_ne!(first.test_aucs("one_hot"), second.test_aucs("one_hot"));
}

#[test]
fn encoding_runs_record_models_and_column_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let c = tiny(
        Experiment::CategoricalEncoding,
        Family::JumpyGamLocal,
        &["helmert", "frequency", "binary"],
        tmp.path(),
    );
    let log = run_experiment(&c).unwrap();
    assert!(log.runs.iter().all(|r| r.succeeded()));
    let columns = |m: &str| log.successes(m).next().unwrap().n_columns().unwrap();
    // 10 signal + 5 noise features plus the encoding of 3 segments.
    assert_eq!(columns("one_hot"), 18);
    assert_eq!(columns("helmert"), 17);
    assert_eq!(columns("frequency"), 16);
    assert_eq!(columns("binary"), 17);
    for r in &log.runs {
        assert_eq!(r.validation_dataset, format!("validation_{:02}", r.iteration % 2));
        let gap = r.auc_gap.unwrap();
        approx::assert_abs_diff_eq!(gap, r.train_auc.unwrap() - r.test_auc.unwrap(), epsilon = 1e-12);
        assert!(r.model.is_some());
    }
}

#[test]
fn output_directory_is_not_created_for_an_invalid_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut c = tiny(Experiment::FeatureSelection, Family::Linear, &["pearson"], &out);
    c.iterations = 0;
    assert!(run_experiment(&c).is_err());
    assert!(!out.exists());
}
