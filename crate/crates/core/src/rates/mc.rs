use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Side;
use crate::error::{Error, Result};
use crate::estimators::{check_applicable, estimate_values, EstimatorSpec};
use crate::family::DensityModel;
use crate::num::{ext_real, fmt12};
use crate::rng::{derive_seed, label, UniformStream};
use crate::stats::{clopper_pearson, weighted_least_squares, zero_count_upper, Z99};

/// Minimum number of repetitions per grid cell.
pub const MIN_REPS: u64 = 10_000;

/// Monte-Carlo controls. Results depend on `(seed, chunk_size)` only, never
/// on `workers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub reps: u64,
    pub seed: u64,
    #[serde(default = "default_chunk")]
    pub chunk_size: u64,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
}

fn default_chunk() -> u64 {
    4096
}

impl McConfig {
    pub fn new(reps: u64, seed: u64) -> Self {
        McConfig {
            reps,
            seed,
            chunk_size: default_chunk(),
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::invalid(format!("reps = {} is below the minimum {MIN_REPS}", self.reps)));
        }
        if self.chunk_size == 0 {
            return Err(Error::invalid("chunk_size must be positive"));
        }
        Ok(())
    }

    pub(crate) fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        if self.workers == 0 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(job))
    }
}

pub(crate) fn check_n_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.len() < 4 {
        return Err(Error::invalid("n grid needs at least 4 values"));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n grid must be positive and strictly increasing"));
    }
    Ok(())
}

/// Count, for sample size `n`, the repetitions with `T > θ + ε` and with
/// `T < θ − ε`. Chunk `c` draws from the stream seeded by
/// `derive_seed(seed, stream, c)`.
pub fn exceedance_counts(
    spec: &EstimatorSpec,
    model: &DensityModel,
    theta: f64,
    epsilon: f64,
    n: usize,
    mc: &McConfig,
) -> Result<(u64, u64)> {
    check_applicable(spec, model)?;
    let stream = label(&format!("{spec}|{}|{}|{}|{n}", model.label(), fmt12(theta), fmt12(epsilon)));
    let chunks = mc.reps.div_ceil(mc.chunk_size);
    let a = model.support.lower;
    let b = model.support.upper;
    let edge_only = match *spec {
        EstimatorSpec::MinShift => Some((1.0, 0.0, 0.0)),
        EstimatorSpec::MaxShift => Some((0.0, 1.0, 0.0)),
        EstimatorSpec::Cc { lambda } => Some((lambda, 1.0 - lambda, 0.0)),
        EstimatorSpec::ShiftedMin { epsilon: e0 } => Some((1.0, 0.0, e0)),
        _ => None,
    };
    let chunk = |c: u64| -> Result<(u64, u64)> {
        let mut rng = UniformStream::new(derive_seed(mc.seed, stream, c));
        let reps = mc.chunk_size.min(mc.reps - c * mc.chunk_size);
        let mut values = vec![0.0; n];
        let (mut plus, mut minus) = (0u64, 0u64);
        for _ in 0..reps {
            let t = if let Some((wl, wu, shift)) = edge_only {
                let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
                for _ in 0..n {
                    let x = model.draw(theta, &mut rng);
                    mn = mn.min(x);
                    mx = mx.max(x);
                }
                let lo_part = if wl > 0.0 { wl * (mn - a) } else { 0.0 };
                let hi_part = if wu > 0.0 { wu * (mx - b) } else { 0.0 };
                lo_part + hi_part - shift
            } else {
                for v in values.iter_mut() {
                    *v = model.draw(theta, &mut rng);
                }
                estimate_values(spec, model, &values)?.value
            };
            if t > theta + epsilon {
                plus += 1;
            } else if t < theta - epsilon {
                minus += 1;
            }
        }
        Ok((plus, minus))
    };
    mc.run(|| {
        (0..chunks)
            .into_par_iter()
            .map(chunk)
            .try_reduce(|| (0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1)))
    })?
}

/// Monte-Carlo rate estimate with per-cell exact binomial bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    #[serde(with = "ext_real")]
    pub value: f64,
    #[serde(with = "ext_real")]
    pub ci_low: f64,
    #[serde(with = "ext_real")]
    pub ci_high: f64,
    pub n_grid: Vec<usize>,
    pub reps: u64,
    pub exceedances: Vec<u64>,
    /// 99% Clopper–Pearson band on each cell's probability.
    pub cell_low: Vec<f64>,
    pub cell_high: Vec<f64>,
    pub seed: u64,
    /// Too few nonzero cells for a fit: `value` is only a lower bound and
    /// `ci_high` is `+∞`.
    pub lower_bound_only: bool,
    /// Log-`n` prefactor exponent held fixed in the fit.
    pub log_n_power: f64,
}

/// Fit `ln p_n ≈ c + γ ln n − β n` by weighted least squares with `γ`
/// fixed, weighting by the width of each cell's 99% exact band.
pub fn fit_rate(n_grid: &[usize], counts: &[u64], reps: u64, log_n_power: f64, seed: u64) -> Result<RateEstimate> {
    let alpha = 0.01;
    let mut cell_low = Vec::with_capacity(counts.len());
    let mut cell_high = Vec::with_capacity(counts.len());
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    let mut zero_bound = 0.0_f64;
    for (&n, &k) in n_grid.iter().zip(counts) {
        let (lo, hi) = clopper_pearson(k, reps, alpha);
        cell_low.push(lo);
        cell_high.push(hi);
        let nf = n as f64;
        if k == 0 {
            let up = zero_count_upper(reps, alpha);
            zero_bound = zero_bound.max((-up.ln() + log_n_power * nf.ln()) / nf);
            continue;
        }
        let p = k as f64 / reps as f64;
        let sigma = (hi.ln() - lo.ln()) / (2.0 * Z99);
        rows.push(vec![1.0, nf]);
        y.push(p.ln() - log_n_power * nf.ln());
        w.push(1.0 / (sigma * sigma));
    }
    let mut est = RateEstimate {
        value: zero_bound,
        ci_low: zero_bound,
        ci_high: f64::INFINITY,
        n_grid: n_grid.to_vec(),
        reps,
        exceedances: counts.to_vec(),
        cell_low,
        cell_high,
        seed,
        lower_bound_only: true,
        log_n_power,
    };
    if rows.len() >= 2 {
        let fit = weighted_least_squares(&rows, &y, &w, true)?;
        let beta = -fit.coef[1];
        let half = Z99 * fit.se(1);
        est.value = beta;
        est.ci_low = beta - half;
        est.ci_high = beta + half;
        est.lower_bound_only = false;
    }
    Ok(est)
}

/// Monte-Carlo exponential rate of `P(T_n > θ+ε)` (or `<`, or either) over
/// `n_grid`.
pub fn mc_rate(
    spec: &EstimatorSpec,
    model: &DensityModel,
    theta: f64,
    epsilon: f64,
    side: Side,
    n_grid: &[usize],
    mc: &McConfig,
) -> Result<RateEstimate> {
    mc.validate()?;
    check_n_grid(n_grid)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon = {epsilon} must be positive")));
    }
    let mut counts = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let (plus, minus) = exceedance_counts(spec, model, theta, epsilon, n, mc)?;
        counts.push(match side {
            Side::Plus => plus,
            Side::Minus => minus,
            Side::Both => plus + minus,
        });
    }
    fit_rate(n_grid, &counts, mc.reps, 0.0, mc.seed)
}
