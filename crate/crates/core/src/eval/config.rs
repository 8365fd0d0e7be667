//! Flat `key = value` experiment files.
//!
//! Blank lines and `#` comments are ignored. Method parameters start from
//! the method's defaults and only the keys present override them.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::sweep::SWEEP_PARAMS;
use super::trials::{TrialConfig, TrialSource};
use crate::dictionary::{Method, MethodParams};
use crate::error::{Error, Result};

pub const VALID_KEYS: [&str; 31] = [
    "method",
    "order",
    "recognition_order",
    "window",
    "overlap",
    "regularization",
    "form",
    "n_ceps",
    "n_filters",
    "weighting",
    "normalization",
    "n_words",
    "utterance_len",
    "sample_rate",
    "segments",
    "corpus_seed",
    "trials_per_word",
    "snr_db",
    "prototype_snr_db",
    "length_jitter",
    "formant_jitter",
    "align",
    "source",
    "seed",
    "remove_dc",
    "normalize_variance",
    "min_length",
    "sweep_param",
    "sweep_values",
    "bits",
    "synth_count",
];

/// Sweep request: a parameter grid, or the five-method comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepSpec {
    Parameter { name: String, values: Vec<f64> },
    Comparison,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub trials: TrialConfig,
    pub sweep: Option<SweepSpec>,
    /// WAV bit depth of synthesized corpora.
    pub wav_bits: u16,
    /// Extra utterances per word written by corpus synthesis.
    pub synth_count: usize,
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::invalid(format!("invalid value '{v}' for key '{key}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::invalid(format!(
            "invalid boolean '{v}' for key '{key}'"
        ))),
    }
}

fn parse_snr(v: &str) -> Result<f64> {
    match v {
        "inf" | "off" | "none" => Ok(f64::INFINITY),
        _ => parse("snr_db", v),
    }
}

pub fn parse_experiment(text: &str) -> Result<ExperimentConfig> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("line {}: expected key = value", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !VALID_KEYS.contains(&k) {
            return Err(Error::invalid(format!(
                "unknown config key '{k}'; valid keys: {}",
                VALID_KEYS.join(", ")
            )));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::invalid(format!("duplicate config key '{k}'")));
        }
    }

    let method: Method = match map.get("method") {
        Some(m) => m.parse()?,
        None => Method::Correlation,
    };
    let mut cfg = TrialConfig::reference(method);
    let get = |k: &str| map.get(k).map(String::as_str);

    apply_method_keys(&mut cfg.params, &map)?;

    if let Some(v) = get("n_words") {
        cfg.corpus.n_words = parse("n_words", v)?;
    }
    if let Some(v) = get("utterance_len") {
        cfg.corpus.utterance_len = parse("utterance_len", v)?;
    }
    if let Some(v) = get("sample_rate") {
        cfg.corpus.sample_rate_hz = parse("sample_rate", v)?;
    }
    if let Some(v) = get("segments") {
        cfg.corpus.segments = parse("segments", v)?;
    }
    if let Some(v) = get("corpus_seed") {
        cfg.corpus.corpus_seed = parse("corpus_seed", v)?;
    }
    if let Some(v) = get("trials_per_word") {
        cfg.trials_per_word = parse("trials_per_word", v)?;
    }
    if let Some(v) = get("snr_db") {
        cfg.snr_db = parse_snr(v)?;
    }
    if let Some(v) = get("prototype_snr_db") {
        cfg.prototype_snr_db = parse_snr(v)?;
    }
    if let Some(v) = get("length_jitter") {
        cfg.length_jitter_fraction = parse("length_jitter", v)?;
    }
    if let Some(v) = get("formant_jitter") {
        cfg.formant_jitter = parse("formant_jitter", v)?;
    }
    if let Some(v) = get("align") {
        cfg.align = v.parse()?;
    }
    if let Some(v) = get("source") {
        cfg.source = match v {
            "fresh" => TrialSource::Fresh,
            "prototypes" => TrialSource::Prototypes,
            _ => {
                return Err(Error::invalid(format!(
                    "invalid source '{v}' (expected fresh or prototypes)"
                )))
            }
        };
    }
    if let Some(v) = get("seed") {
        cfg.rng_seed = parse("seed", v)?;
    }
    if let Some(v) = get("remove_dc") {
        cfg.preprocess.remove_dc = parse_bool("remove_dc", v)?;
    }
    if let Some(v) = get("normalize_variance") {
        cfg.preprocess.normalize_variance = parse_bool("normalize_variance", v)?;
    }
    if let Some(v) = get("min_length") {
        cfg.preprocess.min_length_samples = parse("min_length", v)?;
    }
    cfg.validate()?;

    let sweep = match (get("sweep_param"), get("sweep_values")) {
        (None, None) => None,
        (Some("comparison"), None) => Some(SweepSpec::Comparison),
        (Some("comparison"), Some(_)) => {
            return Err(Error::invalid(
                "sweep_values must not be given with sweep_param = comparison",
            ))
        }
        (Some(name), Some(values)) => {
            if !SWEEP_PARAMS.contains(&name) {
                return Err(Error::invalid(format!(
                    "unknown sweep parameter '{name}' (expected comparison or one of {})",
                    SWEEP_PARAMS.join(", ")
                )));
            }
            let values = values
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    if name == "snr_db" {
                        parse_snr(s)
                    } else {
                        parse("sweep_values", s)
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.is_empty() {
                return Err(Error::invalid("sweep_values is empty"));
            }
            Some(SweepSpec::Parameter {
                name: name.to_string(),
                values,
            })
        }
        (Some(_), None) => return Err(Error::invalid("sweep_param needs sweep_values")),
        (None, Some(_)) => return Err(Error::invalid("sweep_values needs sweep_param")),
    };

    let wav_bits = match get("bits") {
        Some(v) => parse("bits", v)?,
        None => 16,
    };
    if wav_bits != 8 && wav_bits != 16 {
        return Err(Error::invalid("bits must be 8 or 16"));
    }
    let synth_count = match get("synth_count") {
        Some(v) => parse("synth_count", v)?,
        None => 0,
    };

    Ok(ExperimentConfig {
        trials: cfg,
        sweep,
        wav_bits,
        synth_count,
    })
}

/// Method-specific keys of a configuration.
pub const METHOD_KEYS: [&str; 10] = [
    "order",
    "recognition_order",
    "window",
    "overlap",
    "regularization",
    "form",
    "n_ceps",
    "n_filters",
    "weighting",
    "normalization",
];

/// Default parameters of `method` with `settings` (method keys and their
/// values, as in a configuration file) applied and validated.
pub fn method_params(method: Method, settings: &[(&str, String)]) -> Result<MethodParams> {
    let mut map = BTreeMap::new();
    for (k, v) in settings {
        if !METHOD_KEYS.contains(k) {
            return Err(Error::invalid(format!("'{k}' is not a method parameter")));
        }
        map.insert(k.to_string(), v.clone());
    }
    let mut params = MethodParams::default_for(method);
    apply_method_keys(&mut params, &map)?;
    Ok(params)
}

fn apply_method_keys(params: &mut MethodParams, map: &BTreeMap<String, String>) -> Result<()> {
    let method = params.method();
    for (k, v) in map {
        let k = k.as_str();
        let v = v.as_str();
        match (k, &mut *params) {
            (
                "order",
                MethodParams::Correlation {
                    order,
                    recognition_order,
                    ..
                },
            ) => {
                *order = parse(k, v)?;
                if !map.contains_key("recognition_order") {
                    *recognition_order = *order;
                }
            }
            (
                "order",
                MethodParams::Cepstral {
                    order,
                    recognition_order,
                    ..
                },
            ) => {
                *order = parse(k, v)?;
                if !map.contains_key("recognition_order") {
                    *recognition_order = *order;
                }
            }
            ("order", MethodParams::Filter { order, .. }) => {
                *order = parse(k, v)?;
            }
            (
                "recognition_order",
                MethodParams::Correlation {
                    recognition_order, ..
                }
                | MethodParams::Cepstral {
                    recognition_order, ..
                },
            ) => {
                *recognition_order = parse(k, v)?;
            }
            (
                "window",
                MethodParams::Spectral { window_len, .. } | MethodParams::Msfb { window_len, .. },
            ) => {
                *window_len = parse(k, v)?;
            }
            (
                "overlap",
                MethodParams::Spectral { overlap, .. } | MethodParams::Msfb { overlap, .. },
            ) => {
                *overlap = parse(k, v)?;
            }
            ("regularization", MethodParams::Correlation { regularization, .. }) => {
                *regularization = parse(k, v)?;
            }
            ("form", MethodParams::Correlation { form, .. }) => {
                *form = v.parse()?;
            }
            (
                "n_ceps",
                MethodParams::Cepstral { n_ceps, .. } | MethodParams::Msfb { n_ceps, .. },
            ) => {
                *n_ceps = parse(k, v)?;
            }
            ("n_filters", MethodParams::Msfb { n_filters, .. }) => {
                *n_filters = parse(k, v)?;
            }
            ("weighting", MethodParams::Cepstral { weighting, .. }) => {
                *weighting = v.parse()?;
            }
            ("normalization", MethodParams::Filter { normalization, .. }) => {
                *normalization = v.parse()?;
            }
            (k, _) if METHOD_KEYS.contains(&k) => {
                return Err(Error::invalid(format!(
                    "key '{k}' does not apply to method {method}"
                )))
            }
            _ => {}
        }
    }
    params.validate()
}
