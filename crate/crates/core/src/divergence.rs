//! Divergence closed forms and the per-method decision statistics.
//!
//! Lower is better everywhere: a recognizer picks the dictionary entry
//! with the smallest statistic.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{AutocorrMatrix, CepstralVector, Psd};
use crate::linalg::{cholesky, invert_with_log_det, SquareMatrix};

/// Dictionary-side data for the correlation statistic: the inverse of the
/// reference autocorrelation matrix and its log-determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTemplate {
    pub inverse_matrix: SquareMatrix,
    pub log_det_r: f64,
}

impl CorrelationTemplate {
    /// Inverts a reference matrix, which must be positive-definite.
    pub fn from_autocorr(k_r: &AutocorrMatrix) -> Result<Self> {
        let (mut inverse_matrix, ld) = invert_with_log_det(&k_r.matrix)?;
        if ld.sign <= 0.0 {
            return Err(Error::numerical(
                "reference autocorrelation matrix is not positive-definite",
            ));
        }
        inverse_matrix.symmetrize();
        Ok(Self {
            inverse_matrix,
            log_det_r: ld.log_abs_det,
        })
    }

    pub fn order(&self) -> usize {
        self.inverse_matrix.order()
    }
}

/// Which correlation statistic to evaluate.
///
/// `PaperEq3` is tr(K_r⁻¹K_x) − ln det K_x. It omits ln det K_r, which
/// differs between references, so its ranking equals the ranking by the
/// trace term alone. `FullKl` keeps every term of the Gaussian divergence
/// (times two) and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StatisticForm {
    PaperEq3,
    #[default]
    FullKl,
}

impl FromStr for StatisticForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_eq3" => Ok(StatisticForm::PaperEq3),
            "full_kl" => Ok(StatisticForm::FullKl),
            other => Err(Error::invalid(format!(
                "unknown statistic form '{other}' (expected paper_eq3 or full_kl)"
            ))),
        }
    }
}

impl fmt::Display for StatisticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatisticForm::PaperEq3 => "paper_eq3",
            StatisticForm::FullKl => "full_kl",
        })
    }
}

/// I(x|r) for zero-mean Gaussians with covariances `k_x`, `k_r`:
/// ½ tr(K_r⁻¹K_x) + ½ ln(det K_r / det K_x) − n/2.
pub fn kl_gaussian(k_x: &SquareMatrix, k_r: &SquareMatrix) -> Result<f64> {
    if k_x.order() != k_r.order() {
        return Err(Error::invalid(format!(
            "covariance order mismatch: {} vs {}",
            k_x.order(),
            k_r.order()
        )));
    }
    cholesky(k_x)?;
    cholesky(k_r)?;
    let (inv_r, ld_r) = invert_with_log_det(k_r)?;
    let (_, ld_x) = invert_with_log_det(k_x)?;
    let n = k_x.order() as f64;
    let kl =
        0.5 * inv_r.trace_of_product(k_x)? + 0.5 * (ld_r.log_abs_det - ld_x.log_abs_det) - 0.5 * n;
    if kl < -1e-9 {
        return Err(Error::numerical(format!("negative divergence {kl}")));
    }
    Ok(kl.max(0.0))
}

/// Correlation decision statistic for input matrix `k_x` (with its
/// log-determinant `log_det_x`) against one template.
pub fn stat_correlation(
    k_x: &AutocorrMatrix,
    template: &CorrelationTemplate,
    form: StatisticForm,
    log_det_x: f64,
) -> Result<f64> {
    let trace = template.inverse_matrix.trace_of_product(&k_x.matrix)?;
    Ok(match form {
        StatisticForm::PaperEq3 => trace - log_det_x,
        StatisticForm::FullKl => trace + template.log_det_r - log_det_x - k_x.order() as f64,
    })
}

/// (1/F) Σ_f [G_x/G_r + ln(G_r/G_x)]. Equals 1 iff the spectra match.
pub fn stat_spectral(g_x: &Psd, g_r: &Psd) -> Result<f64> {
    if g_x.bins.len() != g_r.bins.len() {
        return Err(Error::invalid(format!(
            "PSD bin count mismatch: {} vs {}",
            g_x.bins.len(),
            g_r.bins.len()
        )));
    }
    if g_x.window_len != g_r.window_len || g_x.sample_rate_hz != g_r.sample_rate_hz {
        return Err(Error::invalid(
            "PSDs were estimated with different settings",
        ));
    }
    if g_x.bins.is_empty() {
        return Err(Error::invalid("empty PSD"));
    }
    let mut acc = 0.0;
    for (&x, &r) in g_x.bins.iter().zip(&g_r.bins) {
        if !(x > 0.0 && r > 0.0) {
            return Err(Error::invalid("PSD bins must be positive"));
        }
        let t = x / r;
        acc += t - t.ln();
    }
    Ok(acc / g_x.bins.len() as f64)
}

/// t − ln t with t = s²_{x,r} / s²_r.
pub fn stat_filter(residual_variance_xr: f64, model_variance_r: f64) -> Result<f64> {
    if !(residual_variance_xr > 0.0) || !(model_variance_r > 0.0) {
        return Err(Error::invalid("variances must be strictly positive"));
    }
    let t = residual_variance_xr / model_variance_r;
    Ok(t - t.ln())
}

/// How the filter method scales signals before whitening.
///
/// `Innovation` divides each signal by its own order-P innovation variance
/// (from Burg), so every reference model has unit excitation and the
/// statistic compares prediction gains. `Signal` uses the variance
/// normalization of preprocessing only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterNormalization {
    #[default]
    Innovation,
    Signal,
}

impl FromStr for FilterNormalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "innovation" => Ok(FilterNormalization::Innovation),
            "signal" => Ok(FilterNormalization::Signal),
            other => Err(Error::invalid(format!(
                "unknown filter normalization '{other}' (expected innovation or signal)"
            ))),
        }
    }
}

impl fmt::Display for FilterNormalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterNormalization::Innovation => "innovation",
            FilterNormalization::Signal => "signal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CepstralWeighting {
    Uniform,
    /// w_q = q; drops c_0 and emphasizes higher quefrencies.
    #[default]
    Index,
}

impl FromStr for CepstralWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CepstralWeighting::Uniform),
            "index" => Ok(CepstralWeighting::Index),
            other => Err(Error::invalid(format!(
                "unknown cepstral weighting '{other}' (expected uniform or index)"
            ))),
        }
    }
}

impl fmt::Display for CepstralWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CepstralWeighting::Uniform => "uniform",
            CepstralWeighting::Index => "index",
        })
    }
}

/// Weighted Euclidean cepstral distance sqrt(Σ w_q (c_x,q − c_r,q)²).
///
/// Stand-in for the Hermansky-Junqua exponential distance, whose exact
/// form is not available here.
pub fn dist_cepstral(
    c_x: &CepstralVector,
    c_r: &CepstralVector,
    weighting: CepstralWeighting,
) -> Result<f64> {
    if c_x.kind != c_r.kind {
        return Err(Error::invalid(format!(
            "cepstral kind mismatch: {} vs {}",
            c_x.kind, c_r.kind
        )));
    }
    check_lengths(c_x, c_r)?;
    let s: f64 = c_x
        .coeffs
        .iter()
        .zip(&c_r.coeffs)
        .enumerate()
        .map(|(q, (a, b))| {
            let w = match weighting {
                CepstralWeighting::Uniform => 1.0,
                CepstralWeighting::Index => q as f64,
            };
            w * (a - b).powi(2)
        })
        .sum();
    Ok(s.sqrt())
}

pub fn dist_euclid(c_x: &CepstralVector, c_r: &CepstralVector) -> Result<f64> {
    check_lengths(c_x, c_r)?;
    Ok(c_x
        .coeffs
        .iter()
        .zip(&c_r.coeffs)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt())
}

fn check_lengths(c_x: &CepstralVector, c_r: &CepstralVector) -> Result<()> {
    if c_x.coeffs.len() != c_r.coeffs.len() {
        return Err(Error::invalid(format!(
            "cepstral length mismatch: {} vs {}",
            c_x.coeffs.len(),
            c_r.coeffs.len()
        )));
    }
    Ok(())
}
