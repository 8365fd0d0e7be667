use rand::Rng;
use rayon::prelude::*;

use super::synth::{add_noise, derive_seed, reference_vocabulary, rng, WordModel};
use crate::dictionary::{build_dictionary, recognize, Method, MethodParams};
use crate::error::{Error, Result};
use crate::signal::{align_length, AlignPolicy, PreprocessConfig, Signal};

/// Where trial utterances come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrialSource {
    /// Fresh realizations of each word model.
    #[default]
    Fresh,
    /// The clean training prototypes themselves.
    Prototypes,
}

/// The synthetic vocabulary and prototype length.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub n_words: usize,
    pub utterance_len: usize,
    pub sample_rate_hz: u32,
    /// Stationary segments per word (1 = stationary words).
    pub segments: usize,
    pub corpus_seed: u64,
}

pub const REFERENCE_CORPUS_SEED: u64 = 20040;

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            n_words: 10,
            utterance_len: 4000,
            sample_rate_hz: 8000,
            segments: 1,
            corpus_seed: REFERENCE_CORPUS_SEED,
        }
    }
}

impl CorpusConfig {
    pub fn vocabulary(&self) -> Vec<WordModel> {
        reference_vocabulary(self.n_words, self.segments, self.corpus_seed)
    }

    /// One clean utterance per word, the training material.
    pub fn prototypes(&self, seed: u64) -> Result<Vec<(String, Signal)>> {
        self.vocabulary()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let s = w.utterance(
                    self.utterance_len,
                    self.sample_rate_hz,
                    0.0,
                    derive_seed(seed, &[u64::MAX, i as u64]),
                )?;
                Ok((w.label.clone(), s))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub corpus: CorpusConfig,
    pub trials_per_word: usize,
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    /// SNR of the training prototypes; `f64::INFINITY` keeps them clean.
    pub prototype_snr_db: f64,
    /// Trial lengths are uniform in utterance_len · [1 − j, 1 + j].
    pub length_jitter_fraction: f64,
    /// Relative per-utterance perturbation of resonance angles.
    pub formant_jitter: f64,
    pub params: MethodParams,
    pub preprocess: PreprocessConfig,
    pub align: AlignPolicy,
    pub source: TrialSource,
    pub rng_seed: u64,
}

impl TrialConfig {
    /// The reference setup: 10 words, clean prototypes, 100 trials each at
    /// 18 dB SNR with ±20 % length jitter, default parameters of `method`.
    pub fn reference(method: Method) -> Self {
        Self {
            corpus: CorpusConfig::default(),
            trials_per_word: 100,
            snr_db: 18.0,
            prototype_snr_db: f64::INFINITY,
            length_jitter_fraction: 0.2,
            formant_jitter: 0.0,
            params: MethodParams::default_for(method),
            preprocess: PreprocessConfig::default(),
            align: AlignPolicy::None,
            source: TrialSource::Fresh,
            rng_seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.trials_per_word == 0 {
            return Err(Error::invalid("trials_per_word must be at least 1"));
        }
        if self.corpus.n_words == 0 {
            return Err(Error::invalid("n_words must be at least 1"));
        }
        if !(self.length_jitter_fraction >= 0.0 && self.length_jitter_fraction < 1.0) {
            return Err(Error::invalid("length_jitter must lie in [0, 1)"));
        }
        if !(self.formant_jitter >= 0.0 && self.formant_jitter < 1.0) {
            return Err(Error::invalid("formant_jitter must lie in [0, 1)"));
        }
        for snr in [self.snr_db, self.prototype_snr_db] {
            if snr.is_nan() || snr == f64::NEG_INFINITY {
                return Err(Error::invalid("SNR must be a number or inf"));
            }
        }
        if self.corpus.segments == 0 || self.corpus.segments > 3 {
            return Err(Error::invalid("segments must be 1, 2 or 3"));
        }
        if self.corpus.utterance_len < 16 {
            return Err(Error::invalid("utterance_len is too short"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub k_corr: u64,
    pub k_tot: u64,
    pub w: f64,
    /// Per-word recognition rate, in label order.
    pub per_word_accuracy: Vec<(String, f64)>,
    /// `confusion[true][predicted]` counts.
    pub confusion: Vec<Vec<u64>>,
    pub config: TrialConfig,
}

/// Trains on one clean prototype per word, then recognizes
/// `trials_per_word` utterances of every word and tallies the outcome.
/// Trials are independent and may run in parallel; every random draw is
/// derived from `rng_seed`, the word index and the trial index.
pub fn run_trials(cfg: &TrialConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let vocab = cfg.corpus.vocabulary();
    let training = training_corpus(cfg)?;
    let dict = build_dictionary(&training, &cfg.params, &cfg.preprocess)?;

    let jobs: Vec<(usize, usize)> = (0..vocab.len())
        .flat_map(|w| (0..cfg.trials_per_word).map(move |t| (w, t)))
        .collect();
    let outcomes: Vec<Result<usize>> = jobs
        .par_iter()
        .map(|&(w, t)| {
            let signal = trial_signal(cfg, &vocab[w], &training[w].1, w, t)?;
            Ok(recognize(&signal, &dict)?.winner_index)
        })
        .collect();
    let winners = outcomes
        .into_iter()
        .zip(&jobs)
        .map(|(r, &(w, t))| {
            r.map_err(|e| e.context(format!("trial {t} of word '{}'", vocab[w].label)))
        })
        .collect::<Result<Vec<usize>>>()?;

    let r = vocab.len();
    let mut confusion = vec![vec![0u64; r]; r];
    for (&(w, _), &p) in jobs.iter().zip(&winners) {
        confusion[w][p] += 1;
    }
    let k_corr: u64 = (0..r).map(|i| confusion[i][i]).sum();
    let k_tot = jobs.len() as u64;
    let labels: Vec<String> = vocab.iter().map(|w| w.label.clone()).collect();
    let per_word_accuracy = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            (
                l.clone(),
                confusion[i][i] as f64 / cfg.trials_per_word as f64,
            )
        })
        .collect();
    Ok(EvalReport {
        labels,
        k_corr,
        k_tot,
        w: k_corr as f64 / k_tot as f64,
        per_word_accuracy,
        confusion,
        config: cfg.clone(),
    })
}

/// The labeled training prototypes of `cfg`, one per word, with
/// prototype noise applied.
pub fn training_corpus(cfg: &TrialConfig) -> Result<Vec<(String, Signal)>> {
    cfg.validate()?;
    cfg.corpus
        .prototypes(cfg.rng_seed)?
        .into_iter()
        .enumerate()
        .map(|(i, (label, s))| {
            let seed = derive_seed(cfg.rng_seed, &[u64::MAX - 1, i as u64]);
            Ok((label, add_noise(&s, cfg.prototype_snr_db, seed)?))
        })
        .collect()
}

/// The first `count` trial utterances of every word, exactly as
/// [`run_trials`] draws them, in (word, trial) order.
pub fn trial_corpus(cfg: &TrialConfig, count: usize) -> Result<Vec<(String, Signal)>> {
    let vocab = cfg.corpus.vocabulary();
    let training = training_corpus(cfg)?;
    let mut out = Vec::with_capacity(vocab.len() * count);
    for (w, word) in vocab.iter().enumerate() {
        for t in 0..count {
            out.push((
                word.label.clone(),
                trial_signal(cfg, word, &training[w].1, w, t)?,
            ));
        }
    }
    Ok(out)
}

fn trial_signal(
    cfg: &TrialConfig,
    word: &WordModel,
    prototype: &Signal,
    w: usize,
    t: usize,
) -> Result<Signal> {
    let seed = derive_seed(cfg.rng_seed, &[w as u64, t as u64]);
    let clean = match cfg.source {
        TrialSource::Prototypes => return Ok(prototype.clone()),
        TrialSource::Fresh => {
            let base = cfg.corpus.utterance_len as f64;
            let j = cfg.length_jitter_fraction;
            let len = if j > 0.0 {
                let f: f64 = rng(derive_seed(seed, &[0])).random_range(-j..=j);
                (base * (1.0 + f)).round() as usize
            } else {
                cfg.corpus.utterance_len
            };
            word.utterance(
                len,
                cfg.corpus.sample_rate_hz,
                cfg.formant_jitter,
                derive_seed(seed, &[1]),
            )?
        }
    };
    let noisy = add_noise(&clean, cfg.snr_db, derive_seed(seed, &[2]))?;
    align_length(&noisy, cfg.corpus.utterance_len, cfg.align)
}
