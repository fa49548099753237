//! Small statistical helpers: exact binomial intervals, weighted least
//! squares and the Kolmogorov–Smirnov statistic.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::optimize::bisect_transition;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    bisect_transition(|x| beta_reg(a, b, x) >= p, 0.0, 1.0, 1e-16)
}

/// Clopper–Pearson interval for `k` successes out of `n` at confidence
/// `1 - alpha`. Zero and full counts give one-sided bounds at the edge.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n);
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        beta_quantile(kf, nf - kf + 1.0, 0.5 * alpha)
    };
    let hi = if k == n {
        1.0
    } else {
        beta_quantile(kf + 1.0, nf - kf, 1.0 - 0.5 * alpha)
    };
    (lo, hi)
}

/// One-sided upper bound on a binomial probability when no success was seen.
pub fn zero_count_upper(n: u64, alpha: f64) -> f64 {
    1.0 - alpha.powf(1.0 / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coef: Vec<f64>,
    /// Covariance of `coef`, row-major.
    pub cov: Vec<f64>,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

impl LinearFit {
    pub fn se(&self, i: usize) -> f64 {
        let p = self.coef.len();
        self.cov[i * p + i].max(0.0).sqrt()
    }
}

/// Weighted least squares `y ≈ X·coef` with weights `w` (inverse variances).
///
/// With `known_variance` the covariance is `(XᵀWX)⁻¹`; otherwise it is
/// scaled by the weighted residual variance.
pub fn weighted_least_squares(rows: &[Vec<f64>], y: &[f64], w: &[f64], known_variance: bool) -> Result<LinearFit> {
    let n = rows.len();
    if n == 0 || y.len() != n || w.len() != n {
        return Err(Error::invalid("least squares needs matching nonempty inputs"));
    }
    let p = rows[0].len();
    if n < p {
        return Err(Error::invalid("least squares needs at least as many rows as coefficients"));
    }
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for ((row, &yi), &wi) in rows.iter().zip(y).zip(w) {
        for i in 0..p {
            xty[i] += wi * row[i] * yi;
            for j in 0..p {
                xtx[i * p + j] += wi * row[i] * row[j];
            }
        }
    }
    let inv = invert(&xtx, p).ok_or_else(|| Error::Domain("singular least-squares system".into()))?;
    let coef: Vec<f64> = (0..p).map(|i| (0..p).map(|j| inv[i * p + j] * xty[j]).sum()).collect();

    let fitted: Vec<f64> = rows.iter().map(|r| r.iter().zip(&coef).map(|(a, b)| a * b).sum()).collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let wsum: f64 = w.iter().sum();
    let ybar = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / wsum;
    let ss_res: f64 = residuals.iter().zip(w).map(|(r, wi)| wi * r * r).sum();
    let ss_tot: f64 = y.iter().zip(w).map(|(yi, wi)| wi * (yi - ybar).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    let scale = if known_variance || n == p {
        1.0
    } else {
        ss_res / (n - p) as f64
    };
    let cov = inv.iter().map(|v| v * scale).collect();
    Ok(LinearFit {
        coef,
        cov,
        r_squared,
        residuals,
    })
}

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
pub fn ols_line(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&xi| vec![1.0, xi]).collect();
    weighted_least_squares(&rows, y, &vec![1.0; x.len()], false)
}

fn invert(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; p * p];
    for i in 0..p {
        inv[i * p + i] = 1.0;
    }
    let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    for col in 0..p {
        let pivot = (col..p).max_by(|&i, &j| m[i * p + col].abs().total_cmp(&m[j * p + col].abs()))?;
        if m[pivot * p + col].abs() <= 1e-14 * scale {
            return None;
        }
        for k in 0..p {
            m.swap(col * p + k, pivot * p + k);
            inv.swap(col * p + k, pivot * p + k);
        }
        let d = m[col * p + col];
        for k in 0..p {
            m[col * p + k] /= d;
            inv[col * p + k] /= d;
        }
        for r in 0..p {
            if r != col {
                let factor = m[r * p + col];
                for k in 0..p {
                    m[r * p + k] -= factor * m[col * p + k];
                    inv[r * p + k] -= factor * inv[col * p + k];
                }
            }
        }
    }
    Some(inv)
}

/// Kolmogorov–Smirnov statistic of `values` (any order) against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic 1% critical value of the KS statistic for sample size `n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_624_1 / (n as f64).sqrt()
}
