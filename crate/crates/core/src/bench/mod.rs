//! Test/control experiments: every arm swaps one preprocessing stage, the
//! rest of the pipeline stays standard, and each arm is tuned, fitted and
//! scored on the same datasets.

pub mod cli;
mod config;
mod ingest;
mod pipeline;
mod report;
mod runner;

use std::fmt;

use crate::catenc::EncodingMethod;
use crate::error::{Error, Result};
use crate::featsel::SelectionMethod;
use crate::nullimp::ImputeMethod;
use crate::synthdata::Experiment;

pub use config::{DatasetOverrides, ExperimentConfig, ExternalData, PipelineSettings};
pub use ingest::{ingest_csv, CleaningRules};
pub use pipeline::{prepare, ArmManifest, Prepared};
pub use report::{read_run_log, report, report_dir, ReportFiles};
pub use runner::{run_arm_iteration, run_experiment, tune_arm, ArmOutcome, Failure, RunLog, RunResult};

/// The stage an arm changes, and the method it uses there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Select(SelectionMethod),
    Encode(EncodingMethod),
    Impute(ImputeMethod),
}

impl Arm {
    /// The arm that keeps standard preprocessing for `experiment`.
    pub fn control(experiment: Experiment) -> Arm {
        match experiment {
            Experiment::FeatureSelection => Arm::Select(SelectionMethod::All),
            Experiment::CategoricalEncoding => Arm::Encode(EncodingMethod::OneHot),
            Experiment::NullImputation => Arm::Impute(ImputeMethod::Mean),
        }
    }

    /// Parses a method id in the namespace of `experiment`.
    pub fn parse(experiment: Experiment, id: &str) -> Result<Arm> {
        match experiment {
            Experiment::FeatureSelection => id.parse().map(Arm::Select),
            Experiment::CategoricalEncoding => id.parse().map(Arm::Encode),
            Experiment::NullImputation => id.parse().map(Arm::Impute),
        }
        .map_err(|_| Error::Config(format!("unknown {} method {id:?}", experiment.as_str())))
    }

    pub fn id(self) -> &'static str {
        match self {
            Arm::Select(m) => m.as_str(),
            Arm::Encode(m) => m.as_str(),
            Arm::Impute(m) => m.as_str(),
        }
    }

    pub fn experiment(self) -> Experiment {
        match self {
            Arm::Select(_) => Experiment::FeatureSelection,
            Arm::Encode(_) => Experiment::CategoricalEncoding,
            Arm::Impute(_) => Experiment::NullImputation,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_within_their_experiment() {
        for m in SelectionMethod::ALL {
            assert_eq!(
                Arm::parse(Experiment::FeatureSelection, m.as_str()).unwrap(),
                Arm::Select(m)
            );
        }
        for m in EncodingMethod::ALL {
            assert_eq!(
                Arm::parse(Experiment::CategoricalEncoding, m.as_str()).unwrap(),
                Arm::Encode(m)
            );
        }
        for m in ImputeMethod::ALL {
            assert_eq!(
                Arm::parse(Experiment::NullImputation, m.as_str()).unwrap(),
                Arm::Impute(m)
            );
        }
        assert!(Arm::parse(Experiment::NullImputation, "lasso").is_err());
    }
}
