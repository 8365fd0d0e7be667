//! Signal container, PCM/WAV loading and the preprocessing applied before
//! every feature extractor.

use std::fs;
use std::io::Cursor;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite, non-empty sequence of amplitudes with its sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("signal has no samples"));
        }
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / self.len() as f64
    }

    /// Mean square amplitude.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.len() as f64
    }
}

/// On-disk sample encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    /// Raw unsigned 8-bit PCM, offset 128.
    Pcm8,
    /// Raw signed 16-bit little-endian PCM.
    Pcm16,
    /// RIFF/WAVE, mono uncompressed PCM (8 or 16 bit).
    Wav,
}

impl SampleFormat {
    /// Guesses the format from a file extension.
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "wav" => Some(SampleFormat::Wav),
            "pcm8" | "u8" => Some(SampleFormat::Pcm8),
            "pcm16" | "s16" | "raw" => Some(SampleFormat::Pcm16),
            _ => None,
        }
    }
}

impl FromStr for SampleFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcm8" => Ok(SampleFormat::Pcm8),
            "pcm16" => Ok(SampleFormat::Pcm16),
            "wav" => Ok(SampleFormat::Wav),
            other => Err(Error::invalid(format!(
                "unknown sample format '{other}' (expected pcm8, pcm16 or wav)"
            ))),
        }
    }
}

/// Reads a signal from disk. `raw_rate_hz` is required for raw PCM and
/// ignored for WAV, whose header carries the rate.
pub fn load_signal(path: &Path, format: SampleFormat, raw_rate_hz: Option<u32>) -> Result<Signal> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_signal(&bytes, format, raw_rate_hz).map_err(|e| e.context(format!("{}", path.display())))
}

pub fn decode_signal(
    bytes: &[u8],
    format: SampleFormat,
    raw_rate_hz: Option<u32>,
) -> Result<Signal> {
    let raw_rate =
        || raw_rate_hz.ok_or_else(|| Error::invalid("raw PCM needs an explicit sample rate"));
    match format {
        SampleFormat::Pcm8 => {
            let rate = raw_rate()?;
            if bytes.is_empty() {
                return Err(Error::format("zero-length PCM payload"));
            }
            Signal::new(bytes.iter().map(|&b| u8_to_amplitude(b)).collect(), rate)
        }
        SampleFormat::Pcm16 => {
            let rate = raw_rate()?;
            if bytes.is_empty() {
                return Err(Error::format("zero-length PCM payload"));
            }
            if !bytes.len().is_multiple_of(2) {
                return Err(Error::format("16-bit PCM payload has an odd byte count"));
            }
            let samples = bytes
                .chunks_exact(2)
                .map(|c| i16_to_amplitude(i16::from_le_bytes([c[0], c[1]])))
                .collect();
            Signal::new(samples, rate)
        }
        SampleFormat::Wav => decode_wav(bytes),
    }
}

fn decode_wav(bytes: &[u8]) -> Result<Signal> {
    let reader = hound::WavReader::new(Cursor::new(bytes))
        .map_err(|e| Error::format(format!("WAV: {e}")))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::format(format!(
            "WAV has {} channels, only mono is supported",
            spec.channels
        )));
    }
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::format("WAV is not integer PCM"));
    }
    let scale = match spec.bits_per_sample {
        8 => 128.0,
        16 => 32768.0,
        b => return Err(Error::format(format!("unsupported WAV bit depth {b}"))),
    };
    let samples = reader
        .into_samples::<i32>()
        .map(|s| s.map(|v| f64::from(v) / scale))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::format(format!("WAV: {e}")))?;
    if samples.is_empty() {
        return Err(Error::format("WAV data chunk is empty"));
    }
    Signal::new(samples, spec.sample_rate)
}

fn u8_to_amplitude(b: u8) -> f64 {
    (f64::from(b) - 128.0) / 128.0
}

fn i16_to_amplitude(v: i16) -> f64 {
    f64::from(v) / 32768.0
}

fn amplitude_to_i8(x: f64) -> i8 {
    (x * 128.0).round().clamp(-128.0, 127.0) as i8
}

fn amplitude_to_i16(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Quantizes a signal into `format`. WAV output uses `wav_bits` (8 or 16).
pub fn encode_signal(signal: &Signal, format: SampleFormat, wav_bits: u16) -> Result<Vec<u8>> {
    match format {
        SampleFormat::Pcm8 => Ok(signal
            .samples()
            .iter()
            .map(|&x| (i16::from(amplitude_to_i8(x)) + 128) as u8)
            .collect()),
        SampleFormat::Pcm16 => Ok(signal
            .samples()
            .iter()
            .flat_map(|&x| amplitude_to_i16(x).to_le_bytes())
            .collect()),
        SampleFormat::Wav => encode_wav(signal, wav_bits),
    }
}

fn encode_wav(signal: &Signal, bits: u16) -> Result<Vec<u8>> {
    if bits != 8 && bits != 16 {
        return Err(Error::invalid(format!("unsupported WAV bit depth {bits}")));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate_hz(),
        bits_per_sample: bits,
        sample_format: hound::SampleFormat::Int,
    };
    let mut buf = Vec::new();
    {
        let mut writer = hound::WavWriter::new(Cursor::new(&mut buf), spec)
            .map_err(|e| Error::format(format!("WAV: {e}")))?;
        for &x in signal.samples() {
            let res = if bits == 8 {
                writer.write_sample(amplitude_to_i8(x))
            } else {
                writer.write_sample(amplitude_to_i16(x))
            };
            res.map_err(|e| Error::format(format!("WAV: {e}")))?;
        }
        writer
            .finalize()
            .map_err(|e| Error::format(format!("WAV: {e}")))?;
    }
    Ok(buf)
}

pub fn save_signal(
    path: &Path,
    signal: &Signal,
    format: SampleFormat,
    wav_bits: u16,
) -> Result<()> {
    let bytes = encode_signal(signal, format, wav_bits)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub remove_dc: bool,
    pub normalize_variance: bool,
    pub min_length_samples: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            remove_dc: true,
            normalize_variance: true,
            min_length_samples: 2,
        }
    }
}

/// Removes the mean and/or scales to unit variance. Silence is rejected
/// when variance normalization is requested.
pub fn preprocess(signal: &Signal, cfg: &PreprocessConfig) -> Result<Signal> {
    if cfg.min_length_samples < 2 {
        return Err(Error::invalid("min_length_samples must be at least 2"));
    }
    if signal.len() < cfg.min_length_samples {
        return Err(Error::invalid(format!(
            "signal has {} samples, need at least {}",
            signal.len(),
            cfg.min_length_samples
        )));
    }
    let mut samples = signal.samples().to_vec();
    if cfg.remove_dc {
        let mean = signal.mean();
        samples.iter_mut().for_each(|x| *x -= mean);
    }
    if cfg.normalize_variance {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let mean_sq = samples.iter().map(|x| x * x).sum::<f64>() / n;
        if var <= 1e-24 * mean_sq.max(f64::MIN_POSITIVE) || var == 0.0 {
            return Err(Error::invalid("signal has zero variance (silence)"));
        }
        let gain = var.sqrt().recip();
        samples.iter_mut().for_each(|x| *x *= gain);
    }
    Signal::new(samples, signal.sample_rate_hz())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlignPolicy {
    #[default]
    None,
    /// Center-truncate or symmetrically zero-pad to the target length.
    TruncatePad,
}

impl FromStr for AlignPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AlignPolicy::None),
            "truncate_pad" => Ok(AlignPolicy::TruncatePad),
            other => Err(Error::invalid(format!(
                "unknown align policy '{other}' (expected none or truncate_pad)"
            ))),
        }
    }
}

impl std::fmt::Display for AlignPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlignPolicy::None => "none",
            AlignPolicy::TruncatePad => "truncate_pad",
        })
    }
}

pub fn align_length(signal: &Signal, target_len: usize, policy: AlignPolicy) -> Result<Signal> {
    if target_len < 2 {
        return Err(Error::invalid(
            "alignment target must be at least 2 samples",
        ));
    }
    let n = signal.len();
    let samples = match policy {
        AlignPolicy::None => return Ok(signal.clone()),
        AlignPolicy::TruncatePad if n >= target_len => {
            let start = (n - target_len) / 2;
            signal.samples()[start..start + target_len].to_vec()
        }
        AlignPolicy::TruncatePad => {
            let left = (target_len - n) / 2;
            let mut out = vec![0.0; target_len];
            out[left..left + n].copy_from_slice(signal.samples());
            out
        }
    };
    Signal::new(samples, signal.sample_rate_hz())
}
