//! Least-information-divergence recognizers for isolated-word signals.
//!
//! Three recognizers score an input word against a dictionary of reference
//! words by the Kullback-Leibler divergence between Gaussian process models:
//!
//! * **correlation**: autocorrelation matrices estimated over non-overlapping
//!   windows, scored with the closed-form Gaussian divergence;
//! * **spectral**: averaged Hamming-windowed periodograms, scored with the
//!   asymptotic frequency-domain divergence;
//! * **filter**: Burg autoregressive models used as whitening filters, scored
//!   by the residual power left after whitening.
//!
//! Two baselines (AR-cepstrum and mel-scale filter-bank cepstrum) share the
//! same dictionary machinery. The [`eval`] module generates a synthetic
//! autoregressive word corpus and runs recognition trials and parameter
//! sweeps over it.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dictionary;
pub mod divergence;
pub mod error;
pub mod eval;
pub mod features;
pub mod linalg;
pub mod signal;

pub use dictionary::{
    build_dictionary, load_dictionary, recognize, recognize_with_form, save_dictionary, Dictionary,
    Method, MethodParams, RecognitionResult,
};
pub use error::{Error, Result};
pub use signal::{PreprocessConfig, Signal};
