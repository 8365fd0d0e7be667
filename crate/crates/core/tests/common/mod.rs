//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's numerical code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    match n {
        0 => 1.0,
        1 => a[0][0],
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[0][j] * cofactor_det(&minor)
            })
            .sum(),
    }
}

/// Lower Cholesky factor of an SPD matrix given as rows.
pub fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                assert!(d > 0.0, "oracle cholesky: matrix not SPD");
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Solves L y = b by forward substitution.
pub fn forward_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    y
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

pub fn toeplitz_rows(r: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| r[i.abs_diff(j)]).collect())
        .collect()
}

/// Predictor coefficients (x_t = Σ a_i x_{t−i} + e_t) of the polynomial
/// with the given conjugate pole pairs and optional real pole.
pub fn coeffs_from_poles(pairs: &[(f64, f64)], real: Option<f64>) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mut mul = |section: &[f64]| {
        let mut next = vec![0.0; poly.len() + section.len() - 1];
        for (i, p) in poly.iter().enumerate() {
            for (j, s) in section.iter().enumerate() {
                next[i + j] += p * s;
            }
        }
        poly = next;
    };
    for &(r, th) in pairs {
        mul(&[1.0, -2.0 * r * th.cos(), r * r]);
    }
    if let Some(p) = real {
        mul(&[1.0, -p]);
    }
    poly[1..].iter().map(|c| -c).collect()
}

/// Random stable predictor of exactly `order` with pole radii in `radii`.
pub fn random_stable_ar(rng: &mut ChaCha8Rng, order: usize, radii: (f64, f64)) -> Vec<f64> {
    let pairs: Vec<(f64, f64)> = (0..order / 2)
        .map(|_| {
            (
                rng.random_range(radii.0..radii.1),
                rng.random_range(0.05..PI - 0.05),
            )
        })
        .collect();
    let real = (order % 2 == 1).then(|| {
        let r: f64 = rng.random_range(radii.0..radii.1);
        if rng.random_bool(0.5) {
            r
        } else {
            -r
        }
    });
    coeffs_from_poles(&pairs, real)
}

/// Random stable predictor of `order` from reflection coefficients drawn
/// uniformly in (−k_max, k_max), via the step-up recursion.
pub fn random_ar_from_reflections(rng: &mut ChaCha8Rng, order: usize, k_max: f64) -> Vec<f64> {
    let mut a: Vec<f64> = Vec::with_capacity(order);
    for _ in 0..order {
        let k: f64 = rng.random_range(-k_max..k_max);
        let prev = a.clone();
        let m = prev.len();
        for i in 0..m {
            a[i] = prev[i] - k * prev[m - 1 - i];
        }
        a.push(k);
    }
    a
}

/// Autocovariance r(0..=max_lag) of an AR process with unit-variance
/// excitation, summed from its impulse response.
pub fn ar_autocovariance(coeffs: &[f64], max_lag: usize, terms: usize) -> Vec<f64> {
    let p = coeffs.len();
    let mut h = vec![0.0; terms];
    h[0] = 1.0;
    for t in 1..terms {
        h[t] = (1..=p.min(t)).map(|i| coeffs[i - 1] * h[t - i]).sum();
    }
    (0..=max_lag)
        .map(|k| (0..terms - k).map(|j| h[j] * h[j + k]).sum())
        .collect()
}

/// Closed-form autocovariance of AR(1) x_t = a x_{t−1} + e_t, unit
/// excitation.
pub fn ar1_autocovariance(a: f64, max_lag: usize) -> Vec<f64> {
    let r0 = 1.0 / (1.0 - a * a);
    (0..=max_lag).map(|k| r0 * a.powi(k as i32)).collect()
}

/// Closed-form autocovariance of AR(2) x_t = a1 x_{t−1} + a2 x_{t−2} + e_t,
/// unit excitation.
pub fn ar2_autocovariance(a1: f64, a2: f64, max_lag: usize) -> Vec<f64> {
    let r0 = (1.0 - a2) / ((1.0 + a2) * ((1.0 - a2).powi(2) - a1 * a1));
    let mut r = vec![r0, a1 * r0 / (1.0 - a2)];
    while r.len() <= max_lag {
        let k = r.len();
        r.push(a1 * r[k - 1] + a2 * r[k - 2]);
    }
    r.truncate(max_lag + 1);
    r
}

/// Drives the AR recursion with N(0, σ²) noise after a burn-in.
pub fn generate_ar(coeffs: &[f64], sigma2: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    let p = coeffs.len();
    let burn = 1000 + 50 * p;
    let sd = sigma2.sqrt();
    let mut x = vec![0.0; n + burn];
    for t in 0..n + burn {
        let e: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
        x[t] = e
            + (1..=p.min(t))
                .map(|i| coeffs[i - 1] * x[t - i])
                .sum::<f64>();
    }
    x.split_off(burn)
}

/// Random SPD matrix B Bᵀ + δ I.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let b: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: f64 = (0..n).map(|k| b[i][k] * b[j][k]).sum();
                    s + if i == j { 0.1 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

pub fn flatten(a: &[Vec<f64>]) -> Vec<f64> {
    a.iter().flatten().copied().collect()
}
