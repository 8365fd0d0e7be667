//! Reference dictionaries and multi-channel recognition.
//!
//! A [`Dictionary`] holds one method's reference features, one entry per
//! word. [`recognize`] extracts the matching input feature once, scores it
//! against every entry and picks the smallest score (lowest index on
//! ties).

mod format;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

pub use format::{
    dictionary_from_bytes, dictionary_to_bytes, load_dictionary, save_dictionary, FORMAT_VERSION,
    MAGIC,
};

use crate::divergence::{
    dist_cepstral, dist_euclid, stat_correlation, stat_filter, stat_spectral, CepstralWeighting,
    CorrelationTemplate, FilterNormalization, StatisticForm,
};
use crate::error::{Error, Result};
use crate::features::{
    ar_cepstrum, estimate_autocorr_matrix, estimate_psd, fit_ar_burg, msfb_cepstrum, whiten,
    ArModel, CepstralVector, Psd, DEFAULT_REGULARIZATION,
};
use crate::linalg::{log_det, lu_decompose};
use crate::signal::{preprocess, PreprocessConfig, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Correlation,
    Spectral,
    Filter,
    Cepstral,
    Msfb,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Correlation,
        Method::Spectral,
        Method::Filter,
        Method::Cepstral,
        Method::Msfb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Correlation => "correlation",
            Method::Spectral => "spectral",
            Method::Filter => "filter",
            Method::Cepstral => "cepstral",
            Method::Msfb => "msfb",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Method::Correlation => 1,
            Method::Spectral => 2,
            Method::Filter => 3,
            Method::Cepstral => 4,
            Method::Msfb => 5,
        }
    }

    /// True for the three divergence-based recognizers.
    pub fn is_divergence(self) -> bool {
        matches!(
            self,
            Method::Correlation | Method::Spectral | Method::Filter
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method '{s}' (expected correlation, spectral, filter, cepstral or msfb)"
                ))
            })
    }
}

/// Method-specific parameters. Where a `recognition_order` exists it is the
/// order used on the input side; the correlation method requires it to
/// equal the training order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodParams {
    Correlation {
        order: usize,
        recognition_order: usize,
        regularization: f64,
        form: StatisticForm,
    },
    Spectral {
        window_len: usize,
        overlap: f64,
    },
    Filter {
        order: usize,
        normalization: FilterNormalization,
    },
    Cepstral {
        order: usize,
        recognition_order: usize,
        n_ceps: usize,
        weighting: CepstralWeighting,
    },
    Msfb {
        n_filters: usize,
        n_ceps: usize,
        window_len: usize,
        overlap: f64,
    },
}

impl MethodParams {
    /// Default parameters of each method.
    pub fn default_for(method: Method) -> Self {
        match method {
            Method::Correlation => MethodParams::Correlation {
                order: 20,
                recognition_order: 20,
                regularization: DEFAULT_REGULARIZATION,
                form: StatisticForm::FullKl,
            },
            Method::Spectral => MethodParams::Spectral {
                window_len: 256,
                overlap: 0.5,
            },
            Method::Filter => MethodParams::Filter {
                order: 40,
                normalization: FilterNormalization::Innovation,
            },
            Method::Cepstral => MethodParams::Cepstral {
                order: 16,
                recognition_order: 16,
                n_ceps: 20,
                weighting: CepstralWeighting::Index,
            },
            Method::Msfb => MethodParams::Msfb {
                n_filters: 20,
                n_ceps: 13,
                window_len: 256,
                overlap: 0.5,
            },
        }
    }

    pub fn method(&self) -> Method {
        match self {
            MethodParams::Correlation { .. } => Method::Correlation,
            MethodParams::Spectral { .. } => Method::Spectral,
            MethodParams::Filter { .. } => Method::Filter,
            MethodParams::Cepstral { .. } => Method::Cepstral,
            MethodParams::Msfb { .. } => Method::Msfb,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::invalid(format!("{name} must be at least 1")))
            } else {
                Ok(())
            }
        };
        let window = |w: usize, overlap: f64| {
            if w < 2 || !w.is_power_of_two() {
                return Err(Error::invalid(format!(
                    "window {w} is not a power of two ≥ 2"
                )));
            }
            if !(0.0..1.0).contains(&overlap) {
                return Err(Error::invalid(format!(
                    "overlap {overlap} is outside [0, 1)"
                )));
            }
            Ok(())
        };
        match *self {
            MethodParams::Correlation {
                order,
                recognition_order,
                regularization,
                ..
            } => {
                positive("order", order)?;
                if recognition_order != order {
                    return Err(Error::invalid(format!(
                        "correlation method needs equal training and recognition orders ({order} vs {recognition_order})"
                    )));
                }
                if !(regularization >= 0.0) || !regularization.is_finite() {
                    return Err(Error::invalid("regularization must be non-negative"));
                }
                Ok(())
            }
            MethodParams::Spectral {
                window_len,
                overlap,
            } => window(window_len, overlap),
            MethodParams::Filter { order, .. } => positive("order", order),
            MethodParams::Cepstral {
                order,
                recognition_order,
                n_ceps,
                ..
            } => {
                positive("order", order)?;
                positive("recognition order", recognition_order)?;
                positive("n_ceps", n_ceps)
            }
            MethodParams::Msfb {
                n_filters,
                n_ceps,
                window_len,
                overlap,
            } => {
                positive("n_ceps", n_ceps)?;
                if n_filters < n_ceps {
                    return Err(Error::invalid("n_filters must be at least n_ceps"));
                }
                window(window_len, overlap)
            }
        }
    }
}

/// Reference feature of one dictionary word.
#[derive(Debug, Clone, PartialEq)]
pub enum Feature {
    Correlation(CorrelationTemplate),
    Spectral(Psd),
    Filter(ArModel),
    Cepstral(CepstralVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub label: String,
    pub feature: Feature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub params: MethodParams,
    pub preprocess: PreprocessConfig,
    pub sample_rate_hz: u32,
    pub entries: Vec<Entry>,
}

impl Dictionary {
    pub fn method(&self) -> Method {
        self.params.method()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }

    pub fn format_version(&self) -> u32 {
        FORMAT_VERSION
    }

    /// Checks non-emptiness, label uniqueness and that every feature has
    /// the dimensions recorded in `params`.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.entries.is_empty() {
            return Err(Error::invalid("dictionary has no entries"));
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.label.as_str()) {
                return Err(Error::invalid(format!("duplicate label '{}'", e.label)));
            }
            let ok = match (&self.params, &e.feature) {
                (MethodParams::Correlation { order, .. }, Feature::Correlation(t)) => {
                    t.order() == *order
                }
                (MethodParams::Spectral { window_len, .. }, Feature::Spectral(p)) => {
                    p.window_len == *window_len && p.bins.len() == window_len / 2
                }
                (MethodParams::Filter { order, .. }, Feature::Filter(m)) => m.order() == *order,
                (MethodParams::Cepstral { n_ceps, .. }, Feature::Cepstral(c))
                | (MethodParams::Msfb { n_ceps, .. }, Feature::Cepstral(c)) => {
                    c.coeffs.len() == *n_ceps
                }
                _ => false,
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "entry '{}' does not match the dictionary parameters",
                    e.label
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionResult {
    /// One score per dictionary entry, in entry order.
    pub scores: Vec<f64>,
    pub winner_index: usize,
    pub winner_label: String,
}

impl RecognitionResult {
    /// Entry indices sorted by ascending score, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[a].total_cmp(&self.scores[b]).then(a.cmp(&b)));
        idx
    }
}

fn extract_reference(signal: &Signal, params: &MethodParams) -> Result<Feature> {
    match *params {
        MethodParams::Correlation {
            order,
            regularization,
            ..
        } => {
            let k = estimate_autocorr_matrix(signal, order, regularization)?;
            Ok(Feature::Correlation(CorrelationTemplate::from_autocorr(
                &k,
            )?))
        }
        MethodParams::Spectral {
            window_len,
            overlap,
        } => Ok(Feature::Spectral(estimate_psd(
            signal, window_len, overlap,
        )?)),
        MethodParams::Filter {
            order,
            normalization,
        } => {
            let model = fit_ar_burg(signal, order)?;
            Ok(Feature::Filter(match normalization {
                FilterNormalization::Innovation => ArModel::new(model.coeffs().to_vec(), 1.0)?,
                FilterNormalization::Signal => model,
            }))
        }
        MethodParams::Cepstral { order, n_ceps, .. } => {
            let model = fit_ar_burg(signal, order)?;
            Ok(Feature::Cepstral(ar_cepstrum(&model, n_ceps)?))
        }
        MethodParams::Msfb {
            n_filters,
            n_ceps,
            window_len,
            overlap,
        } => Ok(Feature::Cepstral(msfb_cepstrum(
            signal, n_filters, n_ceps, window_len, overlap,
        )?)),
    }
}

/// Trains a dictionary: one reference feature per labeled signal.
pub fn build_dictionary(
    corpus: &[(String, Signal)],
    params: &MethodParams,
    preprocess_cfg: &PreprocessConfig,
) -> Result<Dictionary> {
    params.validate()?;
    if corpus.is_empty() {
        return Err(Error::invalid("training corpus is empty"));
    }
    let sample_rate_hz = corpus[0].1.sample_rate_hz();
    let mut seen = HashSet::new();
    let mut entries = Vec::with_capacity(corpus.len());
    for (label, signal) in corpus {
        if !seen.insert(label.as_str()) {
            return Err(Error::invalid(format!("duplicate label '{label}'")));
        }
        if signal.sample_rate_hz() != sample_rate_hz {
            return Err(Error::invalid(format!(
                "'{label}' is sampled at {} Hz, corpus uses {sample_rate_hz} Hz",
                signal.sample_rate_hz()
            )));
        }
        let feature = preprocess(signal, preprocess_cfg)
            .and_then(|s| extract_reference(&s, params))
            .map_err(|e| e.context(format!("word '{label}'")))?;
        entries.push(Entry {
            label: label.clone(),
            feature,
        });
    }
    let dict = Dictionary {
        params: *params,
        preprocess: *preprocess_cfg,
        sample_rate_hz,
        entries,
    };
    dict.validate()?;
    Ok(dict)
}

/// Recognizes with the dictionary's own parameters.
pub fn recognize(signal: &Signal, dict: &Dictionary) -> Result<RecognitionResult> {
    let form = match dict.params {
        MethodParams::Correlation { form, .. } => form,
        _ => StatisticForm::default(),
    };
    recognize_with_form(signal, dict, form)
}

/// Like [`recognize`], overriding the correlation statistic form. The form
/// is ignored by the other methods.
pub fn recognize_with_form(
    signal: &Signal,
    dict: &Dictionary,
    form: StatisticForm,
) -> Result<RecognitionResult> {
    if dict.entries.is_empty() {
        return Err(Error::invalid("dictionary has no entries"));
    }
    if signal.sample_rate_hz() != dict.sample_rate_hz {
        return Err(Error::invalid(format!(
            "input is sampled at {} Hz, dictionary at {} Hz",
            signal.sample_rate_hz(),
            dict.sample_rate_hz
        )));
    }
    let x = preprocess(signal, &dict.preprocess)?;
    let scores = score_entries(&x, dict, form)?;
    let mut winner = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.is_nan() {
            return Err(Error::numerical(format!(
                "score for '{}' is not a number",
                dict.entries[i].label
            )));
        }
        if *s < scores[winner] {
            winner = i;
        }
    }
    Ok(RecognitionResult {
        winner_label: dict.entries[winner].label.clone(),
        winner_index: winner,
        scores,
    })
}

fn mismatch(label: &str) -> Error {
    Error::invalid(format!("entry '{label}' has a feature of the wrong kind"))
}

fn score_entries(x: &Signal, dict: &Dictionary, form: StatisticForm) -> Result<Vec<f64>> {
    match dict.params {
        MethodParams::Correlation {
            recognition_order,
            regularization,
            ..
        } => {
            let k_x = estimate_autocorr_matrix(x, recognition_order, regularization)?;
            let ld = log_det(&lu_decompose(&k_x.matrix)?);
            if ld.sign <= 0.0 {
                return Err(Error::numerical(
                    "input autocorrelation matrix is not positive-definite",
                ));
            }
            dict.entries
                .iter()
                .map(|e| match &e.feature {
                    Feature::Correlation(t) => stat_correlation(&k_x, t, form, ld.log_abs_det),
                    _ => Err(mismatch(&e.label)),
                })
                .collect()
        }
        MethodParams::Spectral {
            window_len,
            overlap,
        } => {
            let g_x = estimate_psd(x, window_len, overlap)?;
            dict.entries
                .iter()
                .map(|e| match &e.feature {
                    Feature::Spectral(g_r) => stat_spectral(&g_x, g_r),
                    _ => Err(mismatch(&e.label)),
                })
                .collect()
        }
        MethodParams::Filter {
            order,
            normalization,
        } => {
            // Whitening is linear, so scaling the input by 1/σ_x scales the
            // residual variance by 1/σ_x².
            let scale = match normalization {
                FilterNormalization::Innovation => fit_ar_burg(x, order)?.residual_variance(),
                FilterNormalization::Signal => 1.0,
            };
            dict.entries
                .iter()
                .map(|e| match &e.feature {
                    Feature::Filter(model) => {
                        stat_filter(whiten(x, model)? / scale, model.residual_variance())
                    }
                    _ => Err(mismatch(&e.label)),
                })
                .collect()
        }
        MethodParams::Cepstral {
            recognition_order,
            n_ceps,
            weighting,
            ..
        } => {
            let c_x = ar_cepstrum(&fit_ar_burg(x, recognition_order)?, n_ceps)?;
            dict.entries
                .iter()
                .map(|e| match &e.feature {
                    Feature::Cepstral(c_r) => dist_cepstral(&c_x, c_r, weighting),
                    _ => Err(mismatch(&e.label)),
                })
                .collect()
        }
        MethodParams::Msfb {
            n_filters,
            n_ceps,
            window_len,
            overlap,
        } => {
            let c_x = msfb_cepstrum(x, n_filters, n_ceps, window_len, overlap)?;
            dict.entries
                .iter()
                .map(|e| match &e.feature {
                    Feature::Cepstral(c_r) => dist_euclid(&c_x, c_r),
                    _ => Err(mismatch(&e.label)),
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(seed: u64, n: usize) -> Signal {
        // xorshift, enough for unit tests
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let v = (0..n)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        Signal::new(v, 8000).unwrap()
    }

    #[test]
    fn duplicate_labels_rejected() {
        let corpus = vec![
            ("a".to_string(), noise(1, 512)),
            ("a".to_string(), noise(2, 512)),
        ];
        let err = build_dictionary(
            &corpus,
            &MethodParams::default_for(Method::Filter),
            &PreprocessConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn innovation_normalized_filters_have_unit_excitation() {
        let corpus = vec![
            ("a".to_string(), noise(3, 2048)),
            ("b".to_string(), noise(4, 2048)),
        ];
        let params = MethodParams::Filter {
            order: 6,
            normalization: FilterNormalization::Innovation,
        };
        let dict = build_dictionary(&corpus, &params, &PreprocessConfig::default()).unwrap();
        for e in &dict.entries {
            match &e.feature {
                Feature::Filter(m) => assert_eq!(m.residual_variance(), 1.0),
                other => panic!("unexpected feature {other:?}"),
            }
        }
        // The input's own gain cancels, so scaling it leaves the scores alone.
        let x = noise(5, 2048);
        let louder = Signal::new(x.samples().iter().map(|v| 7.0 * v).collect(), 8000).unwrap();
        let raw = PreprocessConfig {
            normalize_variance: false,
            ..PreprocessConfig::default()
        };
        let dict = build_dictionary(&corpus, &params, &raw).unwrap();
        let a = recognize(&x, &dict).unwrap();
        let b = recognize(&louder, &dict).unwrap();
        for (p, q) in a.scores.iter().zip(&b.scores) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(build_dictionary(
            &[],
            &MethodParams::default_for(Method::Spectral),
            &PreprocessConfig::default()
        )
        .is_err());
    }

    #[test]
    fn single_entry_always_wins() {
        for method in Method::ALL {
            let corpus = vec![("only".to_string(), noise(3, 4000))];
            let d = build_dictionary(
                &corpus,
                &MethodParams::default_for(method),
                &PreprocessConfig::default(),
            )
            .unwrap();
            let r = recognize(&noise(9, 3000), &d).unwrap();
            assert_eq!(r.winner_index, 0);
            assert_eq!(r.winner_label, "only");
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = noise(4, 4000);
        let corpus = vec![("first".to_string(), s.clone()), ("second".to_string(), s)];
        for method in Method::ALL {
            let d = build_dictionary(
                &corpus,
                &MethodParams::default_for(method),
                &PreprocessConfig::default(),
            )
            .unwrap();
            let r = recognize(&noise(5, 4000), &d).unwrap();
            assert_eq!(r.scores[0], r.scores[1]);
            assert_eq!(r.winner_index, 0, "{method}");
        }
    }

    #[test]
    fn silent_input_rejected() {
        let corpus = vec![("w".to_string(), noise(6, 4000))];
        let d = build_dictionary(
            &corpus,
            &MethodParams::default_for(Method::Correlation),
            &PreprocessConfig::default(),
        )
        .unwrap();
        let silence = Signal::new(vec![0.0; 4000], 8000).unwrap();
        assert!(recognize(&silence, &d).is_err());
    }

    #[test]
    fn failing_entry_is_named() {
        let corpus = vec![
            ("fine".to_string(), noise(7, 4000)),
            ("tiny".to_string(), noise(8, 10)),
        ];
        let err = build_dictionary(
            &corpus,
            &MethodParams::default_for(Method::Filter),
            &PreprocessConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("tiny"), "{err}");
    }

    #[test]
    fn correlation_orders_must_match() {
        let p = MethodParams::Correlation {
            order: 10,
            recognition_order: 12,
            regularization: 1e-6,
            form: StatisticForm::FullKl,
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("lpc".parse::<Method>().is_err());
    }
}
