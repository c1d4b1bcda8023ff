//! Run-directory artifacts: `runs.json`, `summary.csv`, `rankings.csv`
//! (feature selection only) and SVG band plots under `plots/`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::write_atomic;
use crate::error::{Error, Result};
use crate::metrics::{average_rank, summarize, SummaryBand};
use crate::synthdata::Experiment;

use super::runner::RunLog;

pub const RUNS_FILE: &str = "runs.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const RANKINGS_FILE: &str = "rankings.csv";
pub const PLOTS_DIR: &str = "plots";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub runs: PathBuf,
    pub summary: PathBuf,
    pub rankings: Option<PathBuf>,
    pub plots: Vec<PathBuf>,
}

pub fn read_run_log(run_dir: &Path) -> Result<RunLog> {
    let path = run_dir.join(RUNS_FILE);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Report(format!("{}: {e}", path.display())))
}

/// Rewrites every report artifact of an existing run directory from its
/// `runs.json`.
pub fn report_dir(run_dir: &Path) -> Result<ReportFiles> {
    report(&read_run_log(run_dir)?, run_dir)
}

struct MethodSummary {
    method: String,
    runs: usize,
    failures: usize,
    test: Option<SummaryBand>,
    train: Option<SummaryBand>,
    gap: Option<SummaryBand>,
    oracle: Option<f64>,
    columns: Option<f64>,
}

fn band_of(values: Vec<f64>) -> Option<SummaryBand> {
    if values.is_empty() {
        None
    } else {
        summarize(&values).ok()
    }
}

fn summarize_method(log: &RunLog, method: &str) -> MethodSummary {
    let all: Vec<_> = log.runs.iter().filter(|r| r.method == method).collect();
    let ok: Vec<_> = all.iter().filter(|r| r.succeeded()).collect();
    if ok.is_empty() {
        log::warn!("method {method} has no successful runs");
    }
    let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    MethodSummary {
        method: method.to_string(),
        runs: all.len(),
        failures: all.len() - ok.len(),
        test: band_of(ok.iter().filter_map(|r| r.test_auc).collect()),
        train: band_of(ok.iter().filter_map(|r| r.train_auc).collect()),
        gap: band_of(ok.iter().filter_map(|r| r.auc_gap).collect()),
        oracle: mean(ok.iter().filter_map(|r| r.oracle_auc).collect()),
        columns: mean(ok.iter().filter_map(|r| r.n_columns().map(|c| c as f64)).collect()),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn band_fields(b: &Option<SummaryBand>) -> [String; 4] {
    match b {
        Some(b) => [b.mean, b.std, b.lower, b.upper].map(|v| v.to_string()),
        None => Default::default(),
    }
}

fn summary_csv(rows: &[MethodSummary]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string(), "runs".into(), "failures".into()];
    for stat in ["test_auc", "train_auc", "auc_gap"] {
        for part in ["mean", "std", "lower", "upper"] {
            header.push(format!("{stat}_{part}"));
        }
    }
    header.extend(["oracle_auc_mean".to_string(), "columns_mean".into()]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.method.clone(), r.runs.to_string(), r.failures.to_string()];
        for b in [&r.test, &r.train, &r.gap] {
            rec.extend(band_fields(b));
        }
        rec.push(fmt_opt(r.oracle));
        rec.push(fmt_opt(r.columns));
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Report(e.to_string()))
}

/// Average rank of every candidate column per method, one row per column.
fn rankings_csv(log: &RunLog) -> Result<Vec<u8>> {
    let mut features: Option<Vec<String>> = None;
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for method in &log.methods {
        let mut ranks = Vec::new();
        for r in log.successes(method) {
            let Some(m) = &r.manifest else { continue };
            let Some(sel) = &m.selection else { continue };
            match &features {
                None => features = Some(m.candidate_columns.clone()),
                Some(f) if *f != m.candidate_columns => {
                    return Err(Error::Report(format!(
                        "{method} iteration {} ranks different columns",
                        r.iteration
                    )))
                }
                Some(_) => {}
            }
            ranks.push(sel.ranking.clone());
        }
        if !ranks.is_empty() {
            columns.push((method.clone(), average_rank(&ranks)?));
        }
    }
    let features = features.unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["feature".to_string()];
    header.extend(columns.iter().map(|(m, _)| m.clone()));
    w.write_record(&header)?;
    for (j, name) in features.iter().enumerate() {
        let mut rec = vec![name.clone()];
        rec.extend(columns.iter().map(|(_, r)| r[j].to_string()));
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Report(e.to_string()))
}

struct Series<'a> {
    name: &'a str,
    color: &'a str,
    bands: Vec<Option<SummaryBand>>,
}

const PLOT_HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 90.0;
const SLOT: f64 = 90.0;

/// Mean ± 2·std bars per method and series, with an optional horizontal
/// reference line. The plotted numbers are repeated in a leading comment.
fn band_plot(title: &str, methods: &[String], series: &[Series], reference: Option<(&str, f64)>) -> String {
    let width = MARGIN_LEFT + SLOT * methods.len().max(1) as f64 + 150.0;
    let plot_h = PLOT_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for b in series.iter().flat_map(|s| s.bands.iter().flatten()) {
        lo = lo.min(b.lower);
        hi = hi.max(b.upper);
    }
    if let Some((_, v)) = reference {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.08).max(0.005);
    let (lo, hi) = (lo - pad, hi + pad);
    let y = |v: f64| MARGIN_TOP + (hi - v) / (hi - lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, "<!-- data\nseries,method,mean,std,lower,upper,n");
    for se in series {
        for (m, b) in methods.iter().zip(&se.bands) {
            if let Some(b) = b {
                let _ = writeln!(
                    s,
                    "{},{m},{},{},{},{},{}",
                    se.name, b.mean, b.std, b.lower, b.upper, b.n
                );
            }
        }
    }
    if let Some((name, v)) = reference {
        let _ = writeln!(s, "{name},,{v},,,,");
    }
    let _ = writeln!(s, "-->");
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PLOT_HEIGHT:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" font-size="14" text-anchor="middle">{title}</text>"#,
        width / 2.0
    );
    let x_end = MARGIN_LEFT + SLOT * methods.len() as f64;
    let _ = writeln!(
        s,
        r##"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{:.1}" stroke="#333"/>"##,
        MARGIN_TOP + plot_h
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{yy:.1}" x2="{x_end:.1}" y2="{yy:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"##,
            MARGIN_LEFT - 6.0,
            yy + 4.0
        );
    }
    if let Some((name, v)) = reference {
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{yy:.1}" x2="{x_end:.1}" y2="{yy:.1}" stroke="#000" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.1}">{name}</text>"##,
            x_end + 6.0,
            yy + 4.0
        );
    }
    let offset = |k: usize| (k as f64 - (series.len() as f64 - 1.0) / 2.0) * 14.0;
    for (i, m) in methods.iter().enumerate() {
        let cx = MARGIN_LEFT + SLOT * (i as f64 + 0.5);
        for (k, se) in series.iter().enumerate() {
            let Some(b) = &se.bands[i] else { continue };
            let x = cx + offset(k);
            let (y0, y1, ym) = (y(b.lower), y(b.upper), y(b.mean));
            let _ = writeln!(
                s,
                r#"<g stroke="{c}"><line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{y1:.1}"/><line x1="{a:.1}" y1="{y0:.1}" x2="{b:.1}" y2="{y0:.1}"/><line x1="{a:.1}" y1="{y1:.1}" x2="{b:.1}" y2="{y1:.1}"/></g><circle cx="{x:.1}" cy="{ym:.1}" r="3.5" fill="{c}"/>"#,
                c = se.color,
                a = x - 4.0,
                b = x + 4.0
            );
        }
        let ty = MARGIN_TOP + plot_h + 14.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{ty:.1}" text-anchor="end" transform="rotate(-30 {cx:.1} {ty:.1})">{m}</text>"#
        );
    }
    for (k, se) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{ly:.1}" r="4" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            x_end + 14.0,
            se.color,
            x_end + 24.0,
            ly + 4.0,
            se.name
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `runs.json`, `summary.csv`, `rankings.csv` (feature-selection
/// runs) and the band plots into `out_dir`. Output depends only on `log`.
pub fn report(log: &RunLog, out_dir: &Path) -> Result<ReportFiles> {
    if log.runs.is_empty() {
        return Err(Error::Report("no run results to report".into()));
    }
    if log.runs.iter().all(|r| !r.succeeded()) {
        return Err(Error::Report("every run failed".into()));
    }
    let runs = out_dir.join(RUNS_FILE);
    write_atomic(&runs, &serde_json::to_vec_pretty(log)?)?;

    let rows: Vec<MethodSummary> = log.methods.iter().map(|m| summarize_method(log, m)).collect();
    let summary = out_dir.join(SUMMARY_FILE);
    write_atomic(&summary, &summary_csv(&rows)?)?;

    let rankings = if log.experiment == Experiment::FeatureSelection {
        let path = out_dir.join(RANKINGS_FILE);
        write_atomic(&path, &rankings_csv(log)?)?;
        Some(path)
    } else {
        None
    };

    let oracle = {
        let v: Vec<f64> = rows.iter().filter_map(|r| r.oracle).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let auc_plot = band_plot(
        &format!("{}: AUC, mean ± 2 std", log.experiment.as_str()),
        &log.methods,
        &[
            Series {
                name: "train",
                color: "#d62728",
                bands: rows.iter().map(|r| r.train).collect(),
            },
            Series {
                name: "test",
                color: "#1f77b4",
                bands: rows.iter().map(|r| r.test).collect(),
            },
        ],
        oracle.map(|v| ("oracle", v)),
    );
    let gap_plot = band_plot(
        &format!("{}: train - test AUC gap", log.experiment.as_str()),
        &log.methods,
        &[Series {
            name: "gap",
            color: "#2ca02c",
            bands: rows.iter().map(|r| r.gap).collect(),
        }],
        None,
    );
    let plots_dir = out_dir.join(PLOTS_DIR);
    let mut plots = Vec::new();
    for (name, svg) in [("auc.svg", auc_plot), ("auc_gap.svg", gap_plot)] {
        let path = plots_dir.join(name);
        write_atomic(&path, svg.as_bytes())?;
        plots.push(path);
    }
    Ok(ReportFiles {
        runs,
        summary,
        rankings,
        plots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::runner::RunResult;

    fn run(method: &str, iteration: usize, test: f64) -> RunResult {
        RunResult {
            method: method.into(),
            iteration,
            train_dataset: format!("train_{iteration:02}"),
            validation_dataset: "validation_00".into(),
            train_auc: Some(0.9),
            test_auc: Some(test),
            oracle_auc: Some(0.95),
            auc_gap: Some(0.9 - test),
            model: None,
            manifest: None,
            wall_time_secs: 0.5,
            failure: None,
        }
    }

    #[test]
    fn constant_aucs_collapse_bands() {
        let dir = tempfile::tempdir().unwrap();
        let log = RunLog {
            experiment: Experiment::CategoricalEncoding,
            family: None,
            master_seed: 1,
            methods: vec!["one_hot".into(), "helmert".into()],
            runs: vec![
                run("one_hot", 0, 0.8),
                run("one_hot", 1, 0.8),
                run("helmert", 0, 0.7),
                run("helmert", 1, 0.7),
            ],
        };
        let files = report(&log, dir.path()).unwrap();
        assert!(files.rankings.is_none());
        let text = fs::read_to_string(&files.summary).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[0][0], "one_hot");
        assert_eq!(
            (&rows[0][3], &rows[0][4], &rows[0][5], &rows[0][6]),
            ("0.8", "0", "0.8", "0.8")
        );
        let svg = fs::read_to_string(&files.plots[0]).unwrap();
        assert!(svg.contains("test,helmert,0.7,0,0.7,0.7,2"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_or_all_failed_logs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = RunLog {
            experiment: Experiment::NullImputation,
            family: None,
            master_seed: 1,
            methods: vec!["mean".into()],
            runs: Vec::new(),
        };
        assert!(matches!(report(&log, dir.path()), Err(Error::Report(_))));
        let mut failed = run("mean", 0, 0.5);
        failed.failure = Some(crate::bench::Failure {
            kind: "fit".into(),
            message: "boom".into(),
        });
        log.runs.push(failed);
        assert!(matches!(report(&log, dir.path()), Err(Error::Report(_))));
        assert!(!dir.path().join(RUNS_FILE).exists());
    }
}
