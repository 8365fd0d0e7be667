//! Whole-word feature extraction.
//!
//! Every extractor integrates over the entire utterance: autocorrelation
//! matrices average non-overlapping windows, spectra average periodograms,
//! and AR models are fitted to the full record. No segmentation is done.

mod ar;
mod autocorr;
mod cepstrum;
mod psd;

pub use ar::{fit_ar_burg, fit_ar_burg_detailed, whiten, ArModel, BurgFit};
pub use autocorr::{estimate_autocorr_matrix, AutocorrMatrix, DEFAULT_REGULARIZATION};
pub use cepstrum::{
    ar_cepstrum, dct_ii, hz_to_mel, mel_filter_bank, msfb_cepstrum, CepstralKind, CepstralVector,
};
pub use psd::{estimate_psd, hamming, Psd, PSD_FLOOR};
