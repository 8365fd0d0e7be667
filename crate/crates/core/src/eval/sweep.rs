use super::trials::{run_trials, TrialConfig};
use crate::dictionary::{Method, MethodParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub w: f64,
    pub k_corr: u64,
    pub k_tot: u64,
}

/// Parameters a sweep can vary.
pub const SWEEP_PARAMS: [&str; 5] = ["order", "window", "n_ceps", "n_filters", "snr_db"];

fn as_count(name: &str, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::invalid(format!(
            "{name} value {v} is not a positive integer"
        )))
    }
}

/// Returns `cfg` with `param` set to `value`.
pub fn with_parameter(cfg: &TrialConfig, param: &str, value: f64) -> Result<TrialConfig> {
    let mut out = cfg.clone();
    let method = cfg.params.method();
    let unsupported = || {
        Error::invalid(format!(
            "parameter '{param}' does not apply to method {method}"
        ))
    };
    match (param, &mut out.params) {
        ("snr_db", _) => {
            if value.is_nan() {
                return Err(Error::invalid("snr_db must be a number"));
            }
            out.snr_db = value;
        }
        (
            "order",
            MethodParams::Correlation {
                order,
                recognition_order,
                ..
            }
            | MethodParams::Cepstral {
                order,
                recognition_order,
                ..
            },
        ) => {
            *order = as_count(param, value)?;
            *recognition_order = *order;
        }
        ("order", MethodParams::Filter { order, .. }) => *order = as_count(param, value)?,
        (
            "window",
            MethodParams::Spectral { window_len, .. } | MethodParams::Msfb { window_len, .. },
        ) => *window_len = as_count(param, value)?,
        ("n_ceps", MethodParams::Cepstral { n_ceps, .. } | MethodParams::Msfb { n_ceps, .. }) => {
            *n_ceps = as_count(param, value)?
        }
        ("n_filters", MethodParams::Msfb { n_filters, .. }) => *n_filters = as_count(param, value)?,
        (p, _) if SWEEP_PARAMS.contains(&p) => return Err(unsupported()),
        (p, _) => {
            return Err(Error::invalid(format!(
                "unknown sweep parameter '{p}' (expected one of {})",
                SWEEP_PARAMS.join(", ")
            )))
        }
    }
    out.validate()?;
    Ok(out)
}

/// Runs [`run_trials`] once per value, all with the same seed.
pub fn sweep_parameter(cfg: &TrialConfig, param: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    // Validate the whole grid before running anything.
    let configs = values
        .iter()
        .map(|&v| with_parameter(cfg, param, v))
        .collect::<Result<Vec<_>>>()?;
    configs
        .iter()
        .zip(values)
        .map(|(c, &value)| {
            let report = run_trials(c)?;
            Ok(SweepRow {
                value,
                w: report.w,
                k_corr: report.k_corr,
                k_tot: report.k_tot,
            })
        })
        .collect()
}

/// Parameter grids of the parameter-response curves.
pub fn figure_grid(method: Method) -> (&'static str, Vec<f64>) {
    match method {
        Method::Correlation => ("order", vec![5., 10., 15., 20., 25., 30., 40.]),
        Method::Spectral => ("window", vec![32., 64., 128., 256., 512., 1024.]),
        Method::Filter => ("order", vec![5., 10., 20., 30., 40., 50., 60.]),
        Method::Cepstral => ("order", vec![4., 8., 12., 16., 20., 24.]),
        Method::Msfb => ("window", vec![32., 64., 128., 256., 512., 1024.]),
    }
}

/// Six-level grids of the method comparison table. Relative level `k`
/// (1-based) is the k-th smallest value of each method's grid.
pub fn comparison_grid(method: Method) -> (&'static str, Vec<f64>) {
    match method {
        Method::Correlation => ("order", vec![5., 10., 15., 20., 25., 30.]),
        Method::Filter => ("order", vec![10., 20., 30., 40., 50., 60.]),
        other => figure_grid(other),
    }
}

/// One row of the method comparison: w of every method at one relative
/// parameter level, in [`Method::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub relative_param: usize,
    pub w: [f64; 5],
}

/// Sweeps all five methods over their [`comparison_grid`]s. The method
/// parameters of `cfg` are replaced by each method's defaults; everything
/// else (corpus, noise, jitter, seed) is shared.
pub fn compare_methods(cfg: &TrialConfig) -> Result<Vec<ComparisonRow>> {
    let mut columns = Vec::with_capacity(5);
    for method in Method::ALL {
        let mut base = cfg.clone();
        base.params = MethodParams::default_for(method);
        let (param, grid) = comparison_grid(method);
        columns.push(sweep_parameter(&base, param, &grid)?);
    }
    let levels = columns.iter().map(Vec::len).min().unwrap_or(0);
    Ok((0..levels)
        .map(|k| ComparisonRow {
            relative_param: k + 1,
            w: std::array::from_fn(|m| columns[m][k].w),
        })
        .collect())
}
