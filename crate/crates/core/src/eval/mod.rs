//! Synthetic-corpus evaluation: word synthesis, noisy recognition trials,
//! parameter sweeps and CSV reports.

mod config;
mod experiment;
mod report;
mod sweep;
mod synth;
mod trials;

pub use config::{
    method_params, parse_experiment, ExperimentConfig, SweepSpec, METHOD_KEYS, VALID_KEYS,
};
pub use experiment::{run_experiment, ExperimentOutput};
pub use report::{comparison_csv, confusion_csv, sweep_csv};
pub use sweep::{
    compare_methods, comparison_grid, figure_grid, sweep_parameter, with_parameter, ComparisonRow,
    SweepRow, SWEEP_PARAMS,
};
pub use synth::{
    add_noise, derive_seed, reference_vocabulary, synth_utterance, synth_word_model, word_label,
    SynthWordSpec, WordModel, ANGLE_SPREAD, RADIUS_RANGE,
};
pub use trials::{
    run_trials, training_corpus, trial_corpus, CorpusConfig, EvalReport, TrialConfig, TrialSource,
    REFERENCE_CORPUS_SEED,
};
