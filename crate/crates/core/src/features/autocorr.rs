use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::signal::Signal;

/// Default diagonal loading, relative to the mean diagonal entry.
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;

/// Windowed autocorrelation matrix estimate of a whole word.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrMatrix {
    pub matrix: SquareMatrix,
    /// Number of P-sample windows averaged.
    pub window_count: usize,
}

impl AutocorrMatrix {
    pub fn order(&self) -> usize {
        self.matrix.order()
    }
}

/// Averages the outer products of the `floor(n / order)` consecutive,
/// non-overlapping `order`-sample windows `[(i-1)P, iP)`, dropping the
/// remainder, then loads the diagonal with `regularization * tr/P`.
pub fn estimate_autocorr_matrix(
    signal: &Signal,
    order: usize,
    regularization: f64,
) -> Result<AutocorrMatrix> {
    if order == 0 {
        return Err(Error::invalid("autocorrelation order must be at least 1"));
    }
    if !(regularization >= 0.0) || !regularization.is_finite() {
        return Err(Error::invalid(
            "regularization must be a non-negative finite value",
        ));
    }
    let x = signal.samples();
    let windows = x.len() / order;
    if windows == 0 {
        return Err(Error::invalid(format!(
            "signal of {} samples is shorter than one window of order {order}",
            x.len()
        )));
    }

    let p = order;
    let mut acc = vec![0.0; p * p];
    for win in x.chunks_exact(p) {
        for i in 0..p {
            let xi = win[i];
            let row = &mut acc[i * p..i * p + i + 1];
            for (a, xj) in row.iter_mut().zip(&win[..=i]) {
                *a += xi * xj;
            }
        }
    }
    let inv_w = 1.0 / windows as f64;
    for i in 0..p {
        for j in 0..=i {
            let v = acc[i * p + j] * inv_w;
            acc[i * p + j] = v;
            acc[j * p + i] = v;
        }
    }
    let mut matrix = SquareMatrix::from_row_major(p, acc)?;
    if regularization > 0.0 {
        let load = regularization * matrix.trace() / p as f64;
        matrix.add_to_diagonal(load);
    }
    Ok(AutocorrMatrix {
        matrix,
        window_count: windows,
    })
}
