//! The `KLDB` binary dictionary layout. Little-endian throughout:
//!
//! ```text
//! "KLDB" | u32 version | u8 method tag
//! params: u32 sample_rate | u8 remove_dc | u8 normalize_variance | u32 min_length
//!         | method fields (see `write_params`)
//! u32 R
//! R × { u32 label_len | label UTF-8 | feature payload }
//! ```
//!
//! Feature payloads are dimension-prefixed runs of IEEE-754 doubles.

use std::fs;
use std::path::Path;

use super::{Dictionary, Entry, Feature, Method, MethodParams};
use crate::divergence::{
    CepstralWeighting, CorrelationTemplate, FilterNormalization, StatisticForm,
};
use crate::error::{Error, Result};
use crate::features::{ArModel, CepstralKind, CepstralVector, Psd};
use crate::linalg::SquareMatrix;
use crate::signal::PreprocessConfig;

pub const MAGIC: &[u8; 4] = b"KLDB";
pub const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("dimension exceeds u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn doubles(&mut self, v: &[f64]) {
        self.u32(v.len());
        v.iter().for_each(|x| self.f64(*x));
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(format!(
                "truncated dictionary: {what} needs {n} bytes at offset {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        let b = self.take(8, what)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }
    fn flag(&mut self, what: &str) -> Result<bool> {
        match self.u8(what)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(Error::format(format!("{what}: invalid flag byte {v}"))),
        }
    }
    fn doubles_exact(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        if count > (self.buf.len() - self.pos) / 8 {
            return Err(Error::format(format!(
                "truncated dictionary: {what} declares {count} values"
            )));
        }
        (0..count).map(|_| self.f64(what)).collect()
    }
    fn doubles(&mut self, what: &str) -> Result<Vec<f64>> {
        let n = self.u32(what)?;
        self.doubles_exact(n, what)
    }
}

fn form_tag(form: StatisticForm) -> u8 {
    match form {
        StatisticForm::PaperEq3 => 0,
        StatisticForm::FullKl => 1,
    }
}

fn normalization_tag(n: FilterNormalization) -> u8 {
    match n {
        FilterNormalization::Innovation => 0,
        FilterNormalization::Signal => 1,
    }
}

fn weighting_tag(w: CepstralWeighting) -> u8 {
    match w {
        CepstralWeighting::Uniform => 0,
        CepstralWeighting::Index => 1,
    }
}

fn write_params(w: &mut Writer, d: &Dictionary) {
    w.u32(d.sample_rate_hz as usize);
    w.u8(d.preprocess.remove_dc as u8);
    w.u8(d.preprocess.normalize_variance as u8);
    w.u32(d.preprocess.min_length_samples);
    match d.params {
        MethodParams::Correlation {
            order,
            recognition_order,
            regularization,
            form,
        } => {
            w.u32(order);
            w.u32(recognition_order);
            w.f64(regularization);
            w.u8(form_tag(form));
        }
        MethodParams::Spectral {
            window_len,
            overlap,
        } => {
            w.u32(window_len);
            w.f64(overlap);
        }
        MethodParams::Filter {
            order,
            normalization,
        } => {
            w.u32(order);
            w.u8(normalization_tag(normalization));
        }
        MethodParams::Cepstral {
            order,
            recognition_order,
            n_ceps,
            weighting,
        } => {
            w.u32(order);
            w.u32(recognition_order);
            w.u32(n_ceps);
            w.u8(weighting_tag(weighting));
        }
        MethodParams::Msfb {
            n_filters,
            n_ceps,
            window_len,
            overlap,
        } => {
            w.u32(n_filters);
            w.u32(n_ceps);
            w.u32(window_len);
            w.f64(overlap);
        }
    }
}

pub fn dictionary_to_bytes(d: &Dictionary) -> Result<Vec<u8>> {
    d.validate()?;
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION as usize);
    w.u8(d.method().tag());
    write_params(&mut w, d);
    w.u32(d.entries.len());
    for e in &d.entries {
        w.u32(e.label.len());
        w.0.extend_from_slice(e.label.as_bytes());
        match &e.feature {
            Feature::Correlation(t) => {
                w.doubles(t.inverse_matrix.as_slice());
                w.f64(t.log_det_r);
            }
            Feature::Spectral(p) => w.doubles(&p.bins),
            Feature::Filter(m) => {
                w.doubles(m.coeffs());
                w.f64(m.residual_variance());
            }
            Feature::Cepstral(c) => w.doubles(&c.coeffs),
        }
    }
    Ok(w.0)
}

pub fn dictionary_from_bytes(buf: &[u8]) -> Result<Dictionary> {
    let mut r = Reader { buf, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::format("not a KLDB dictionary (bad magic bytes)"));
    }
    let version = r.u32("version")?;
    if version != FORMAT_VERSION as usize {
        return Err(Error::format(format!(
            "unsupported dictionary version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let tag = r.u8("method tag")?;
    let method = Method::ALL
        .into_iter()
        .find(|m| m.tag() == tag)
        .ok_or_else(|| Error::format(format!("unknown method tag {tag}")))?;

    let sample_rate_hz = r.u32("sample rate")? as u32;
    let preprocess = PreprocessConfig {
        remove_dc: r.flag("remove_dc")?,
        normalize_variance: r.flag("normalize_variance")?,
        min_length_samples: r.u32("min_length")?,
    };
    let params = match method {
        Method::Correlation => MethodParams::Correlation {
            order: r.u32("order")?,
            recognition_order: r.u32("recognition order")?,
            regularization: r.f64("regularization")?,
            form: match r.u8("statistic form")? {
                0 => StatisticForm::PaperEq3,
                1 => StatisticForm::FullKl,
                v => return Err(Error::format(format!("unknown statistic form tag {v}"))),
            },
        },
        Method::Spectral => MethodParams::Spectral {
            window_len: r.u32("window")?,
            overlap: r.f64("overlap")?,
        },
        Method::Filter => MethodParams::Filter {
            order: r.u32("order")?,
            normalization: match r.u8("filter normalization")? {
                0 => FilterNormalization::Innovation,
                1 => FilterNormalization::Signal,
                v => {
                    return Err(Error::format(format!(
                        "unknown filter normalization tag {v}"
                    )))
                }
            },
        },
        Method::Cepstral => MethodParams::Cepstral {
            order: r.u32("order")?,
            recognition_order: r.u32("recognition order")?,
            n_ceps: r.u32("n_ceps")?,
            weighting: match r.u8("weighting")? {
                0 => CepstralWeighting::Uniform,
                1 => CepstralWeighting::Index,
                v => return Err(Error::format(format!("unknown weighting tag {v}"))),
            },
        },
        Method::Msfb => MethodParams::Msfb {
            n_filters: r.u32("n_filters")?,
            n_ceps: r.u32("n_ceps")?,
            window_len: r.u32("window")?,
            overlap: r.f64("overlap")?,
        },
    };
    params
        .validate()
        .map_err(|e| Error::format(format!("invalid parameters: {e}")))?;

    let count = r.u32("entry count")?;
    let mut entries = Vec::with_capacity(count.min(1 << 16));
    for i in 0..count {
        let len = r.u32("label length")?;
        let label = std::str::from_utf8(r.take(len, "label")?)
            .map_err(|_| Error::format(format!("entry {i}: label is not UTF-8")))?
            .to_string();
        let feature = match params {
            MethodParams::Correlation { .. } => {
                let n = r.u32("template size")?;
                let order = (n as f64).sqrt().round() as usize;
                if order * order != n || order == 0 {
                    return Err(Error::format(format!(
                        "entry '{label}': template size {n} is not a square"
                    )));
                }
                let data = r.doubles_exact(n, "template")?;
                let inverse_matrix = SquareMatrix::from_row_major(order, data)
                    .map_err(|e| Error::format(format!("entry '{label}': {e}")))?;
                Feature::Correlation(CorrelationTemplate {
                    inverse_matrix,
                    log_det_r: r.f64("log-determinant")?,
                })
            }
            MethodParams::Spectral { window_len, .. } => Feature::Spectral(Psd {
                bins: r.doubles("PSD")?,
                window_len,
                sample_rate_hz,
            }),
            MethodParams::Filter { .. } => {
                let coeffs = r.doubles("AR coefficients")?;
                let var = r.f64("residual variance")?;
                Feature::Filter(
                    ArModel::new(coeffs, var)
                        .map_err(|e| Error::format(format!("entry '{label}': {e}")))?,
                )
            }
            MethodParams::Cepstral { .. } => Feature::Cepstral(CepstralVector {
                coeffs: r.doubles("cepstrum")?,
                kind: CepstralKind::ArCepstrum,
            }),
            MethodParams::Msfb { .. } => Feature::Cepstral(CepstralVector {
                coeffs: r.doubles("cepstrum")?,
                kind: CepstralKind::MsfbCepstrum,
            }),
        };
        entries.push(Entry { label, feature });
    }
    if r.pos != buf.len() {
        return Err(Error::format(format!(
            "{} trailing bytes after the last entry",
            buf.len() - r.pos
        )));
    }
    let d = Dictionary {
        params,
        preprocess,
        sample_rate_hz,
        entries,
    };
    d.validate()
        .map_err(|e| Error::format(format!("inconsistent dictionary: {e}")))?;
    Ok(d)
}

pub fn save_dictionary(d: &Dictionary, path: &Path) -> Result<()> {
    let bytes = dictionary_to_bytes(d)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_dictionary(path: &Path) -> Result<Dictionary> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    dictionary_from_bytes(&bytes)
}
