//! Synthetic word corpus: each word is an all-pole model driven by white
//! Gaussian noise, with 4–5 resonances standing in for formants.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::features::ArModel;
use crate::signal::Signal;

/// Mixes a base seed with a path of indices (splitmix64 finalizer).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pole layout of one synthetic resonance model. Each (radius, angle)
/// stands for a conjugate pole pair, so the AR order is twice the number
/// of pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthWordSpec {
    pub seed: u64,
    pub pole_radii: Vec<f64>,
    pub pole_angles: Vec<f64>,
}

/// Radius range of generated resonances.
pub const RADIUS_RANGE: (f64, f64) = (0.90, 0.98);

/// Half-width of the angle offset around each sector centre, as a fraction
/// of the sector. Small values keep the words of one vocabulary close.
pub const ANGLE_SPREAD: f64 = 0.1;

impl SynthWordSpec {
    /// Draws 4 or 5 resonances from `seed`. Angles are stratified over
    /// (0, π), one per equal sector and within [`ANGLE_SPREAD`] of its
    /// centre; radii are uniform in [`RADIUS_RANGE`].
    pub fn random(seed: u64) -> Self {
        let mut rng = rng(seed);
        let pairs = rng.random_range(4..=5usize);
        let mut pole_angles = Vec::with_capacity(pairs);
        let mut pole_radii = Vec::with_capacity(pairs);
        for k in 0..pairs {
            let u: f64 = rng.random_range(0.5 - ANGLE_SPREAD..0.5 + ANGLE_SPREAD);
            pole_angles.push(PI * (k as f64 + u) / pairs as f64);
            pole_radii.push(rng.random_range(RADIUS_RANGE.0..RADIUS_RANGE.1));
        }
        Self {
            seed,
            pole_radii,
            pole_angles,
        }
    }

    /// Replaces the radius of the k-th resonance with `radii[k]`.
    pub fn with_radii(mut self, radii: &[f64]) -> Self {
        for (r, &shared) in self.pole_radii.iter_mut().zip(radii) {
            *r = shared;
        }
        self
    }

    pub fn ar_order(&self) -> usize {
        2 * self.pole_radii.len()
    }

    /// Copy with every angle scaled by an independent factor in
    /// [1 − fraction, 1 + fraction], clamped inside (0, π).
    pub fn jittered(&self, fraction: f64, seed: u64) -> Self {
        if fraction <= 0.0 {
            return self.clone();
        }
        let mut rng = rng(seed);
        let pole_angles = self
            .pole_angles
            .iter()
            .map(|&a| {
                let f: f64 = rng.random_range(-fraction..=fraction);
                (a * (1.0 + f)).clamp(1e-3, PI - 1e-3)
            })
            .collect();
        Self {
            seed,
            pole_radii: self.pole_radii.clone(),
            pole_angles,
        }
    }
}

/// Expands the conjugate pole pairs into predictor coefficients with unit
/// excitation variance.
pub fn synth_word_model(spec: &SynthWordSpec) -> Result<ArModel> {
    if spec.pole_radii.len() != spec.pole_angles.len() {
        return Err(Error::invalid("pole radii and angles differ in length"));
    }
    if spec.pole_radii.is_empty() {
        return Err(Error::invalid("a word model needs at least one pole pair"));
    }
    // A(z) = Π (1 − 2 r cos θ z⁻¹ + r² z⁻²), coefficients of z⁻ᵏ.
    let mut poly = vec![1.0];
    for (&r, &theta) in spec.pole_radii.iter().zip(&spec.pole_angles) {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid(format!(
                "pole radius {r} is not strictly inside the unit circle"
            )));
        }
        let section = [1.0, -2.0 * r * theta.cos(), r * r];
        let mut next = vec![0.0; poly.len() + 2];
        for (i, p) in poly.iter().enumerate() {
            for (j, s) in section.iter().enumerate() {
                next[i + j] += p * s;
            }
        }
        poly = next;
    }
    ArModel::new(poly[1..].iter().map(|c| -c).collect(), 1.0)
}

/// Drives `model` with white Gaussian noise of its residual variance,
/// discarding a burn-in of ten times the order.
pub fn synth_utterance(
    model: &ArModel,
    length: usize,
    sample_rate_hz: u32,
    seed: u64,
) -> Result<Signal> {
    let p = model.order();
    if length <= p {
        return Err(Error::invalid(format!(
            "utterance length {length} must exceed the model order {p}"
        )));
    }
    if !model.is_stable() {
        return Err(Error::invalid("cannot synthesize from an unstable model"));
    }
    let burn_in = 10 * p;
    let sigma = model.residual_variance().sqrt();
    let a = model.coeffs();
    let mut rng = rng(seed);
    let mut x = vec![0.0; burn_in + length];
    for t in 0..x.len() {
        let e: f64 = rng.sample(StandardNormal);
        let mut v = sigma * e;
        for (i, ai) in a.iter().enumerate().take(t) {
            v += ai * x[t - 1 - i];
        }
        x[t] = v;
    }
    Signal::new(x.split_off(burn_in), sample_rate_hz)
}

/// Adds white Gaussian noise at `snr_db` (signal power over noise power).
/// The noise is rescaled to its exact target power, so the realized SNR
/// matches the request. An infinite SNR returns the input unchanged.
pub fn add_noise(signal: &Signal, snr_db: f64, seed: u64) -> Result<Signal> {
    if snr_db == f64::INFINITY {
        return Ok(signal.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("invalid SNR {snr_db}")));
    }
    if !(signal.variance() > 0.0) {
        return Err(Error::invalid(
            "cannot set an SNR on a zero-variance signal",
        ));
    }
    let mut rng = rng(seed);
    let mut noise: Vec<f64> = (0..signal.len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let noise_power = noise.iter().map(|v| v * v).sum::<f64>() / noise.len() as f64;
    let target = signal.power() / 10f64.powf(snr_db / 10.0);
    let gain = (target / noise_power).sqrt();
    for (n, s) in noise.iter_mut().zip(signal.samples()) {
        *n = s + gain * *n;
    }
    Signal::new(noise, signal.sample_rate_hz())
}

/// Spoken-digit style labels for the first ten words.
pub fn word_label(index: usize) -> String {
    const DIGITS: [&str; 10] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
    ];
    DIGITS
        .get(index)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("word{index}"))
}

/// A word: one resonance layout per stationary segment.
#[derive(Debug, Clone, PartialEq)]
pub struct WordModel {
    pub label: String,
    pub segments: Vec<SynthWordSpec>,
}

impl WordModel {
    /// Synthesizes `length` samples; segments split the length evenly and
    /// are generated independently, then concatenated.
    pub fn utterance(
        &self,
        length: usize,
        sample_rate_hz: u32,
        formant_jitter: f64,
        seed: u64,
    ) -> Result<Signal> {
        let k = self.segments.len();
        let mut out = Vec::with_capacity(length);
        for (j, spec) in self.segments.iter().enumerate() {
            let seg_len = length * (j + 1) / k - length * j / k;
            let spec = spec.jittered(formant_jitter, derive_seed(seed, &[0, j as u64]));
            let model = synth_word_model(&spec)?;
            let s = synth_utterance(
                &model,
                seg_len,
                sample_rate_hz,
                derive_seed(seed, &[1, j as u64]),
            )?;
            out.extend_from_slice(s.samples());
        }
        Signal::new(out, sample_rate_hz)
    }
}

/// The reference vocabulary: `n_words` models with `segments` stationary
/// pieces each, all derived from `corpus_seed`. The words share one table
/// of resonance radii, as if spoken by a single vocal tract, and differ in
/// resonance positions and count.
pub fn reference_vocabulary(n_words: usize, segments: usize, corpus_seed: u64) -> Vec<WordModel> {
    let mut speaker = rng(derive_seed(corpus_seed, &[u64::MAX]));
    let radii: Vec<f64> = (0..5)
        .map(|_| speaker.random_range(RADIUS_RANGE.0..RADIUS_RANGE.1))
        .collect();
    (0..n_words)
        .map(|i| WordModel {
            label: word_label(i),
            segments: (0..segments.max(1))
                .map(|j| {
                    SynthWordSpec::random(derive_seed(corpus_seed, &[i as u64, j as u64]))
                        .with_radii(&radii)
                })
                .collect(),
        })
        .collect()
}
