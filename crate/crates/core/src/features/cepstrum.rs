use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::features::ar::ArModel;
use crate::features::psd::{estimate_psd, Psd};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CepstralKind {
    ArCepstrum,
    MsfbCepstrum,
}

impl fmt::Display for CepstralKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CepstralKind::ArCepstrum => "ar_cepstrum",
            CepstralKind::MsfbCepstrum => "msfb_cepstrum",
        })
    }
}

/// Cepstral coefficients c_0..c_{Q−1}.
#[derive(Debug, Clone, PartialEq)]
pub struct CepstralVector {
    pub coeffs: Vec<f64>,
    pub kind: CepstralKind,
}

/// LPC cepstrum of an AR model: c_0 = ln σ² and
/// c_q = a_q + Σ_{k=1}^{q−1} (k/q) c_k a_{q−k}, with a_q = 0 beyond the
/// model order.
pub fn ar_cepstrum(model: &ArModel, n_coeffs: usize) -> Result<CepstralVector> {
    if n_coeffs == 0 {
        return Err(Error::invalid("need at least one cepstral coefficient"));
    }
    let a = model.coeffs();
    let a_at = |q: usize| {
        if q >= 1 && q <= a.len() {
            a[q - 1]
        } else {
            0.0
        }
    };
    let mut c = Vec::with_capacity(n_coeffs);
    c.push(model.residual_variance().ln());
    for q in 1..n_coeffs {
        let mut v = a_at(q);
        for k in 1..q {
            v += (k as f64 / q as f64) * c[k] * a_at(q - k);
        }
        c.push(v);
    }
    Ok(CepstralVector {
        coeffs: c,
        kind: CepstralKind::ArCepstrum,
    })
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters equally spaced in mel between 0 and Nyquist, laid
/// over the bins of a PSD (frequencies `bin_freqs`). Each row is scaled to
/// unit sum, so a flat spectrum produces equal filter energies. A filter
/// too narrow to cover any bin falls back to the bin nearest its center.
pub fn mel_filter_bank(n_filters: usize, bin_freqs: &[f64], sample_rate_hz: u32) -> Vec<Vec<f64>> {
    let top = hz_to_mel(f64::from(sample_rate_hz) / 2.0);
    let edges: Vec<f64> = (0..n_filters + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_filters + 1) as f64))
        .collect();
    (0..n_filters)
        .map(|m| {
            let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let mut row: Vec<f64> = bin_freqs
                .iter()
                .map(|&f| {
                    if f > lo && f <= center {
                        (f - lo) / (center - lo)
                    } else if f > center && f < hi {
                        (hi - f) / (hi - center)
                    } else {
                        0.0
                    }
                })
                .collect();
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.iter_mut().for_each(|w| *w /= sum);
            } else {
                let nearest = bin_freqs
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - center).abs().total_cmp(&(b.1 - center).abs()))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                row[nearest] = 1.0;
            }
            row
        })
        .collect()
}

/// Orthonormal DCT-II, first `n_out` coefficients.
pub fn dct_ii(input: &[f64], n_out: usize) -> Vec<f64> {
    let m = input.len() as f64;
    (0..n_out)
        .map(|q| {
            let s: f64 = input
                .iter()
                .enumerate()
                .map(|(i, v)| v * (PI * q as f64 * (i as f64 + 0.5) / m).cos())
                .sum();
            let scale = if q == 0 {
                (1.0 / m).sqrt()
            } else {
                (2.0 / m).sqrt()
            };
            s * scale
        })
        .collect()
}

/// Mel-scale filter-bank cepstrum: averaged PSD, triangular mel filters,
/// floored log energies, DCT-II.
pub fn msfb_cepstrum(
    signal: &Signal,
    n_filters: usize,
    n_ceps: usize,
    window_len: usize,
    overlap: f64,
) -> Result<CepstralVector> {
    if n_ceps == 0 {
        return Err(Error::invalid("need at least one cepstral coefficient"));
    }
    if n_filters < n_ceps {
        return Err(Error::invalid(format!(
            "{n_filters} filters cannot yield {n_ceps} cepstral coefficients"
        )));
    }
    let psd = estimate_psd(signal, window_len, overlap)?;
    Ok(msfb_from_psd(&psd, n_filters, n_ceps))
}

pub(crate) fn msfb_from_psd(psd: &Psd, n_filters: usize, n_ceps: usize) -> CepstralVector {
    let freqs: Vec<f64> = (0..psd.bins.len()).map(|i| psd.bin_frequency(i)).collect();
    let bank = mel_filter_bank(n_filters, &freqs, psd.sample_rate_hz);
    let energies: Vec<f64> = bank
        .iter()
        .map(|row| row.iter().zip(&psd.bins).map(|(w, g)| w * g).sum())
        .collect();
    let peak = energies.iter().cloned().fold(0.0, f64::max);
    let floor = (peak * 1e-12).max(f64::MIN_POSITIVE);
    let logs: Vec<f64> = energies.iter().map(|e| e.max(floor).ln()).collect();
    CepstralVector {
        coeffs: dct_ii(&logs, n_ceps),
        kind: CepstralKind::MsfbCepstrum,
    }
}
