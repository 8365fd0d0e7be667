//! Runs a parsed experiment configuration end to end.

use super::config::{ExperimentConfig, SweepSpec};
use super::report::{comparison_csv, confusion_csv, sweep_csv};
use super::sweep::{compare_methods, sweep_parameter, ComparisonRow, SweepRow};
use super::trials::{run_trials, EvalReport};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ExperimentOutput {
    Trials(EvalReport),
    Sweep(Vec<SweepRow>),
    Comparison(Vec<ComparisonRow>),
}

impl ExperimentOutput {
    /// The experiment's CSV report: the confusion matrix for plain trials,
    /// the sweep table, or the comparison table.
    pub fn csv(&self) -> String {
        match self {
            ExperimentOutput::Trials(r) => confusion_csv(r),
            ExperimentOutput::Sweep(rows) => sweep_csv(rows),
            ExperimentOutput::Comparison(rows) => comparison_csv(rows),
        }
    }
}

/// Runs the trials, or the sweep when the configuration requests one.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    Ok(match &cfg.sweep {
        None => ExperimentOutput::Trials(run_trials(&cfg.trials)?),
        Some(SweepSpec::Parameter { name, values }) => {
            ExperimentOutput::Sweep(sweep_parameter(&cfg.trials, name, values)?)
        }
        Some(SweepSpec::Comparison) => ExperimentOutput::Comparison(compare_methods(&cfg.trials)?),
    })
}
