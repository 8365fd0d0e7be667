use crate::error::{Error, Result};
use crate::signal::Signal;

/// All-pole model in predictor form: x_t = Σ a_i x_{t−i} + e_t with
/// Var(e) = `residual_variance`. The whitening filter is
/// A(z) = 1 − Σ a_i z^{−i}.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    coeffs: Vec<f64>,
    residual_variance: f64,
}

impl ArModel {
    pub fn new(coeffs: Vec<f64>, residual_variance: f64) -> Result<Self> {
        if !(residual_variance > 0.0) || !residual_variance.is_finite() {
            return Err(Error::invalid(format!(
                "residual variance must be positive and finite, got {residual_variance}"
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("AR coefficients must be finite"));
        }
        Ok(Self {
            coeffs,
            residual_variance,
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn residual_variance(&self) -> f64 {
        self.residual_variance
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Reflection coefficients by the backward (step-down) recursion;
    /// `None` if any has magnitude ≥ 1, i.e. the model is unstable.
    pub fn reflection_coefficients(&self) -> Option<Vec<f64>> {
        let mut a = self.coeffs.clone();
        let mut k = vec![0.0; a.len()];
        for m in (1..=a.len()).rev() {
            let km = a[m - 1];
            if !(km.abs() < 1.0) {
                return None;
            }
            k[m - 1] = km;
            let denom = 1.0 - km * km;
            let prev: Vec<f64> = (0..m - 1)
                .map(|i| (a[i] + km * a[m - 2 - i]) / denom)
                .collect();
            a.truncate(m - 1);
            a.copy_from_slice(&prev);
        }
        Some(k)
    }

    pub fn is_stable(&self) -> bool {
        self.reflection_coefficients().is_some()
    }
}

/// Burg fit with its per-order diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgFit {
    pub model: ArModel,
    pub reflection: Vec<f64>,
    /// Prediction-error power for orders 0..=P.
    pub error_powers: Vec<f64>,
}

pub fn fit_ar_burg(signal: &Signal, order: usize) -> Result<ArModel> {
    fit_ar_burg_detailed(signal, order).map(|f| f.model)
}

/// Burg recursion: each stage picks the reflection coefficient minimizing
/// the summed forward and backward prediction-error energy, which keeps
/// every |k| < 1.
pub fn fit_ar_burg_detailed(signal: &Signal, order: usize) -> Result<BurgFit> {
    let x = signal.samples();
    let n = x.len();
    if order == 0 {
        return Err(Error::invalid("AR order must be at least 1"));
    }
    if n <= 2 * order {
        return Err(Error::invalid(format!(
            "AR order {order} too large for a signal of {n} samples"
        )));
    }
    let e0 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if !(e0 > 0.0) {
        return Err(Error::numerical("signal has zero power"));
    }

    let mut f = x.to_vec();
    let mut b = x.to_vec();
    let mut a: Vec<f64> = Vec::with_capacity(order);
    let mut reflection = Vec::with_capacity(order);
    let mut error_powers = Vec::with_capacity(order + 1);
    error_powers.push(e0);
    let mut err = e0;

    for m in 1..=order {
        let mut num = 0.0;
        let mut den = 0.0;
        for t in m..n {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        if !(den > 1e-300) {
            return Err(Error::numerical(format!(
                "prediction error vanished at order {m}"
            )));
        }
        let k = 2.0 * num / den;
        if !(k.abs() < 1.0) {
            return Err(Error::numerical(format!(
                "reflection coefficient reached the unit circle at order {m}"
            )));
        }
        let prev = a.clone();
        for i in 0..m - 1 {
            a[i] = prev[i] - k * prev[m - 2 - i];
        }
        a.push(k);
        reflection.push(k);

        for t in (m..n).rev() {
            let ft = f[t];
            let bt = b[t - 1];
            f[t] = ft - k * bt;
            b[t] = bt - k * ft;
        }

        err *= 1.0 - k * k;
        if err <= e0 * 1e-14 {
            return Err(Error::numerical(format!(
                "signal is perfectly predictable at order {m}"
            )));
        }
        error_powers.push(err);
    }

    Ok(BurgFit {
        model: ArModel::new(a, err)?,
        reflection,
        error_powers,
    })
}

/// Mean squared output of the whitening filter A(z) over the samples
/// where the full filter memory is available.
pub fn whiten(signal: &Signal, model: &ArModel) -> Result<f64> {
    let x = signal.samples();
    let p = model.order();
    if x.len() < p + 2 {
        return Err(Error::invalid(format!(
            "signal of {} samples is too short to whiten with order {p}",
            x.len()
        )));
    }
    let a = model.coeffs();
    let mut acc = 0.0;
    for t in p..x.len() {
        let past = &x[t - p..t];
        // a_1 pairs with x_{t-1}, the last element of `past`.
        let pred: f64 = a
            .iter()
            .zip(past.iter().rev())
            .map(|(ai, xi)| ai * xi)
            .sum();
        let e = x[t] - pred;
        acc += e * e;
    }
    let var = acc / (x.len() - p) as f64;
    if !(var > 0.0) {
        return Err(Error::numerical("whitened residual has zero power"));
    }
    Ok(var)
}
