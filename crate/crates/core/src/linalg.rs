//! Dense and Toeplitz linear algebra.
//!
//! The LU factorization yields the inverse and the log-determinant from a
//! single decomposition, which is all the correlation recognizer needs.
//! Determinants are kept in the log domain: an order-25 covariance of a
//! unit-variance signal overflows or underflows a raw product easily.

use crate::error::{Error, Result};

/// Row-major square matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_row_major(order: usize, data: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("matrix order must be positive"));
        }
        if data.len() != order * order {
            return Err(Error::invalid(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        Ok(Self { order, data })
    }

    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let data = (0..order * order)
            .map(|k| f(k / order, k % order))
            .collect();
        Self::from_row_major(order, data)
    }

    pub fn identity(order: usize) -> Self {
        let mut data = vec![0.0; order * order];
        for i in 0..order {
            data[i * order + i] = 1.0;
        }
        Self { order, data }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.order..(row + 1) * self.order]
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            order: self.order,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.order;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self { order: n, data }
    }

    pub fn matmul(&self, other: &SquareMatrix) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::invalid("matrix order mismatch"));
        }
        let n = self.order;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let dst = &mut data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(Self { order: n, data })
    }

    /// tr(self · other) without forming the product.
    pub fn trace_of_product(&self, other: &SquareMatrix) -> Result<f64> {
        if self.order != other.order {
            return Err(Error::invalid(format!(
                "matrix order mismatch: {} vs {}",
                self.order, other.order
            )));
        }
        let n = self.order;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.data[i * n + j] * other.data[j * n + i];
            }
        }
        Ok(acc)
    }

    /// Largest |a_ij − a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let n = self.order;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Replaces the matrix by its symmetric part.
    pub fn symmetrize(&mut self) {
        let n = self.order;
        for i in 0..n {
            for j in i + 1..n {
                let m = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = m;
                self.data[j * n + i] = m;
            }
        }
    }

    pub(crate) fn add_to_diagonal(&mut self, c: f64) {
        for i in 0..self.order {
            self.data[i * self.order + i] += c;
        }
    }
}

/// Combined L\U storage (unit-diagonal L below, U on and above the
/// diagonal) of a row-permuted matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LuFactorization {
    order: usize,
    lu: Vec<f64>,
    /// `permutation[i]` is the original row that ended up in row `i`.
    permutation: Vec<usize>,
    sign: f64,
}

/// Relative pivot magnitude below which a matrix is treated as singular.
pub const SINGULAR_PIVOT_TOLERANCE: f64 = 1e-14;

/// Crout-ordered LU decomposition with implicit-scaled partial pivoting.
pub fn lu_decompose(m: &SquareMatrix) -> Result<LuFactorization> {
    let n = m.order();
    let mut a = m.as_slice().to_vec();

    // Each row is judged against its own largest entry, both for pivot
    // selection and for the singularity test.
    let mut row_scale = Vec::with_capacity(n);
    for i in 0..n {
        let big = m.row(i).iter().fold(0.0f64, |b, x| b.max(x.abs()));
        if big == 0.0 {
            return Err(Error::numerical(format!(
                "matrix is singular (row {i} is zero)"
            )));
        }
        row_scale.push(big);
    }

    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;

    for j in 0..n {
        for i in 0..j {
            let mut sum = a[i * n + j];
            for k in 0..i {
                sum -= a[i * n + k] * a[k * n + j];
            }
            a[i * n + j] = sum;
        }
        let mut best = 0.0;
        let mut pivot_row = j;
        for i in j..n {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[k * n + j];
            }
            a[i * n + j] = sum;
            let merit = sum.abs() / row_scale[i];
            if merit > best {
                best = merit;
                pivot_row = i;
            }
        }
        if pivot_row != j {
            for k in 0..n {
                a.swap(pivot_row * n + k, j * n + k);
            }
            row_scale.swap(pivot_row, j);
            perm.swap(pivot_row, j);
            sign = -sign;
        }
        let pivot = a[j * n + j];
        if pivot.abs() < SINGULAR_PIVOT_TOLERANCE * row_scale[j] {
            return Err(Error::numerical(format!(
                "matrix is singular to working precision (pivot {pivot:e} at column {j})"
            )));
        }
        for i in j + 1..n {
            a[i * n + j] /= pivot;
        }
    }

    Ok(LuFactorization {
        order: n,
        lu: a,
        permutation: perm,
        sign,
    })
}

impl LuFactorization {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// +1 or −1 depending on the parity of the row swaps.
    pub fn permutation_sign(&self) -> f64 {
        self.sign
    }

    pub fn lower(&self) -> SquareMatrix {
        let n = self.order;
        SquareMatrix {
            order: n,
            data: (0..n * n)
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    match i.cmp(&j) {
                        std::cmp::Ordering::Greater => self.lu[k],
                        std::cmp::Ordering::Equal => 1.0,
                        std::cmp::Ordering::Less => 0.0,
                    }
                })
                .collect(),
        }
    }

    pub fn upper(&self) -> SquareMatrix {
        let n = self.order;
        SquareMatrix {
            order: n,
            data: (0..n * n)
                .map(|k| if k / n <= k % n { self.lu[k] } else { 0.0 })
                .collect(),
        }
    }

    /// Diagonal of U, i.e. the pivots in elimination order.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.order)
            .map(|i| self.lu[i * self.order + i])
            .collect()
    }

    /// Applies the row permutation to `m`: row i of the result is row
    /// `permutation[i]` of `m`.
    pub fn permute_rows(&self, m: &SquareMatrix) -> SquareMatrix {
        let n = self.order;
        let mut data = Vec::with_capacity(n * n);
        for &src in &self.permutation {
            data.extend_from_slice(m.row(src));
        }
        SquareMatrix { order: n, data }
    }

    /// Solves `A x = b` for the factored `A`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.order;
        if b.len() != n {
            return Err(Error::invalid(format!(
                "right-hand side has length {}, expected {n}",
                b.len()
            )));
        }
        let mut x: Vec<f64> = self.permutation.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(x)
    }
}

/// Log-magnitude and sign of the determinant of a factored matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs_det: f64,
    /// +1, −1, or 0 for an exactly zero pivot.
    pub sign: f64,
}

impl LogDet {
    pub fn value(&self) -> f64 {
        self.sign * self.log_abs_det.exp()
    }
}

pub fn log_det(f: &LuFactorization) -> LogDet {
    let mut sign = f.sign;
    let mut log_abs_det = 0.0;
    for p in f.pivots() {
        if p == 0.0 {
            return LogDet {
                log_abs_det: f64::NEG_INFINITY,
                sign: 0.0,
            };
        }
        if p < 0.0 {
            sign = -sign;
        }
        log_abs_det += p.abs().ln();
    }
    LogDet { log_abs_det, sign }
}

pub fn invert(f: &LuFactorization) -> Result<SquareMatrix> {
    let n = f.order;
    if f.pivots().contains(&0.0) {
        return Err(Error::numerical("cannot invert a singular factorization"));
    }
    let mut data = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for col in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[col] = 1.0;
        let x = f.solve(&e)?;
        for (row, v) in x.into_iter().enumerate() {
            data[row * n + col] = v;
        }
    }
    SquareMatrix::from_row_major(n, data)
}

/// Inverse and log-determinant from one factorization.
pub fn invert_with_log_det(m: &SquareMatrix) -> Result<(SquareMatrix, LogDet)> {
    let f = lu_decompose(m)?;
    Ok((invert(&f)?, log_det(&f)))
}

/// Lower-triangular Cholesky factor; fails unless `m` is symmetric
/// positive-definite.
pub fn cholesky(m: &SquareMatrix) -> Result<SquareMatrix> {
    let n = m.order();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    if m.asymmetry() > 1e-8 * scale {
        return Err(Error::invalid("matrix is not symmetric"));
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::invalid(format!(
                "matrix is not positive-definite (leading minor {} )",
                j + 1
            )));
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    SquareMatrix::from_row_major(n, l)
}

/// AR fit of the Toeplitz normal equations.
#[derive(Debug, Clone, PartialEq)]
pub struct LevinsonSolution {
    /// Predictor coefficients: x_t = Σ a_i x_{t−i} + e_t.
    pub coeffs: Vec<f64>,
    pub residual_variance: f64,
    pub reflection: Vec<f64>,
}

/// Solves the Yule-Walker equations for `order` from autocorrelations
/// `autocorr[0..=order]`.
pub fn levinson_durbin(autocorr: &[f64], order: usize) -> Result<LevinsonSolution> {
    if autocorr.len() < order + 1 {
        return Err(Error::invalid(format!(
            "need {} autocorrelation lags for order {order}, got {}",
            order + 1,
            autocorr.len()
        )));
    }
    let r0 = autocorr[0];
    if !(r0 > 0.0) {
        return Err(Error::invalid("zero-lag autocorrelation must be positive"));
    }
    let mut a = Vec::with_capacity(order);
    let mut reflection = Vec::with_capacity(order);
    let mut err = r0;
    for m in 1..=order {
        let acc = autocorr[m]
            - a.iter()
                .enumerate()
                .map(|(i, ai)| ai * autocorr[m - 1 - i])
                .sum::<f64>();
        let k = acc / err;
        if !(k.abs() < 1.0) {
            return Err(Error::numerical(format!(
                "reflection coefficient {k} at order {m} is not inside the unit interval"
            )));
        }
        let prev = a.clone();
        for i in 0..m - 1 {
            a[i] = prev[i] - k * prev[m - 2 - i];
        }
        a.push(k);
        reflection.push(k);
        err *= 1.0 - k * k;
    }
    Ok(LevinsonSolution {
        coeffs: a,
        residual_variance: err,
        reflection,
    })
}

/// Symmetric Toeplitz matrix with first row `first_row`.
pub fn toeplitz(first_row: &[f64]) -> Result<SquareMatrix> {
    let n = first_row.len();
    SquareMatrix::from_fn(n, |i, j| first_row[i.abs_diff(j)])
}
