use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Bins are floored at this fraction of the largest bin.
pub const PSD_FLOOR: f64 = 1e-12;

/// Averaged periodogram over the positive-frequency bins `1..=window_len/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub bins: Vec<f64>,
    pub window_len: usize,
    pub sample_rate_hz: u32,
}

impl Psd {
    /// Frequency of `bins[i]` in Hz.
    pub fn bin_frequency(&self, i: usize) -> f64 {
        (i + 1) as f64 * f64::from(self.sample_rate_hz) / self.window_len as f64
    }
}

/// Symmetric Hamming window.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / denom).cos())
        .collect()
}

/// Welch estimate: Hamming-windowed periodograms with hop
/// `window_len * (1 - overlap)`, averaged and normalized by the window
/// energy so white noise of variance σ² gives bins near σ².
pub fn estimate_psd(signal: &Signal, window_len: usize, overlap: f64) -> Result<Psd> {
    if window_len < 2 || !window_len.is_power_of_two() {
        return Err(Error::invalid(format!(
            "PSD window length {window_len} is not a power of two ≥ 2"
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::invalid(format!(
            "overlap {overlap} is outside [0, 1)"
        )));
    }
    let x = signal.samples();
    if x.len() < window_len {
        return Err(Error::invalid(format!(
            "PSD window {window_len} is longer than the signal ({} samples)",
            x.len()
        )));
    }
    let hop = ((window_len as f64 * (1.0 - overlap)).round() as usize).max(1);
    let window = hamming(window_len);
    let window_energy: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::<f64>::new().plan_fft_forward(window_len);
    let half = window_len / 2;
    let mut acc = vec![0.0; half];
    let mut buf = vec![Complex::new(0.0, 0.0); window_len];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut frames = 0usize;
    let mut start = 0;
    while start + window_len <= x.len() {
        for ((b, &xv), &wv) in buf
            .iter_mut()
            .zip(&x[start..start + window_len])
            .zip(&window)
        {
            *b = Complex::new(xv * wv, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, c) in acc.iter_mut().zip(&buf[1..=half]) {
            *a += c.norm_sqr();
        }
        frames += 1;
        start += hop;
    }
    let norm = 1.0 / (frames as f64 * window_energy);
    acc.iter_mut().for_each(|a| *a *= norm);

    let peak = acc.iter().cloned().fold(0.0, f64::max);
    let floor = if peak > 0.0 {
        peak * PSD_FLOOR
    } else {
        f64::MIN_POSITIVE
    };
    acc.iter_mut().for_each(|a| *a = a.max(floor));

    Ok(Psd {
        bins: acc,
        window_len,
        sample_rate_hz: signal.sample_rate_hz(),
    })
}
