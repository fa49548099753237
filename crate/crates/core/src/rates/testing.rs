use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mc::{check_n_grid, fit_rate, McConfig, RateEstimate};
use crate::divergence::{chernoff_exponent, renyi_curve};
use crate::error::Result;
use crate::family::DensityModel;
use crate::num::{ext_real, fmt12};
use crate::quad::QuadratureConfig;
use crate::rng::{derive_seed, label, UniformStream};

/// Polynomial prefactor assumed for the error probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prefactor {
    /// `p_n ≈ C e^{−βn}`.
    Constant,
    /// `p_n ≈ C n^{−1/2} e^{−βn}`, the sharp form for smooth likelihood ratios.
    InverseSqrt,
}

impl Prefactor {
    fn power(self) -> f64 {
        match self {
            Prefactor::Constant => 0.0,
            Prefactor::InverseSqrt => -0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestError {
    pub n_grid: Vec<usize>,
    pub reps: u64,
    /// Type-I error `P_p(q^n > p^n)` per `n`.
    pub e1_hat: Vec<f64>,
    /// Type-II error `P_q(p^n ≥ q^n)` per `n`.
    pub e2_hat: Vec<f64>,
    pub e1_star: RateEstimate,
    pub e2_star: RateEstimate,
    /// Fitted exponent of `e₁ + e₂`.
    pub sum_star: RateEstimate,
    pub prefactor: Prefactor,
    /// Chernoff exponent of the pair.
    #[serde(with = "ext_real")]
    pub target: f64,
}

/// Simulate the likelihood test `{p^n ≥ q^n}` between `f_{θ₁}` and `f_{θ₂}`
/// and fit the exponents of both error probabilities and of their sum.
pub fn test_exponents(
    model: &DensityModel,
    theta1: f64,
    theta2: f64,
    n_grid: &[usize],
    mc: &McConfig,
    q: &QuadratureConfig,
) -> Result<TestError> {
    mc.validate()?;
    check_n_grid(n_grid)?;
    let grid: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
    let target = chernoff_exponent(&renyi_curve(model, theta1, theta2, &grid, q)?).value;
    let prefactor = if model.flags.regular && theta1 != theta2 {
        Prefactor::InverseSqrt
    } else {
        Prefactor::Constant
    };

    let chunks = mc.reps.div_ceil(mc.chunk_size);
    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    for &n in n_grid {
        let stream = label(&format!("lrtest|{}|{}|{}|{n}", model.label(), fmt12(theta1), fmt12(theta2)));
        let chunk = |c: u64| -> (u64, u64) {
            let mut rng = UniformStream::new(derive_seed(mc.seed, stream, c));
            let reps = mc.chunk_size.min(mc.reps - c * mc.chunk_size);
            let (mut e1, mut e2) = (0u64, 0u64);
            for _ in 0..reps {
                // Under p: error when the test rejects p.
                let (mut lp, mut lq) = (0.0, 0.0);
                for _ in 0..n {
                    let x = model.draw(theta1, &mut rng);
                    lp += model.log_pdf(x - theta1);
                    lq += model.log_pdf(x - theta2);
                }
                if !(lp >= lq || (lp == f64::NEG_INFINITY && lq == f64::NEG_INFINITY)) {
                    e1 += 1;
                }
                // Under q: error when the test accepts p.
                let (mut lp, mut lq) = (0.0, 0.0);
                for _ in 0..n {
                    let x = model.draw(theta2, &mut rng);
                    lp += model.log_pdf(x - theta1);
                    lq += model.log_pdf(x - theta2);
                }
                if lp >= lq || (lp == f64::NEG_INFINITY && lq == f64::NEG_INFINITY) {
                    e2 += 1;
                }
            }
            (e1, e2)
        };
        let (a, b) = mc.run(|| {
            (0..chunks)
                .into_par_iter()
                .map(chunk)
                .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1))
        })?;
        k1.push(a);
        k2.push(b);
    }
    let reps = mc.reps;
    let p = prefactor.power();
    let e1_star = fit_rate(n_grid, &k1, reps, p, mc.seed)?;
    let e2_star = fit_rate(n_grid, &k2, reps, p, mc.seed)?;
    // e₁ + e₂ is estimated as (k₁ + k₂)/reps; its band is that of k₁ + k₂
    // successes out of 2·reps, rescaled.
    let ksum: Vec<u64> = k1.iter().zip(&k2).map(|(a, b)| a + b).collect();
    let mut sum_star = fit_rate(n_grid, &ksum, 2 * reps, p, mc.seed)?;
    for v in sum_star.cell_low.iter_mut().chain(sum_star.cell_high.iter_mut()) {
        *v = (2.0 * *v).min(1.0);
    }
    sum_star.reps = reps;
    Ok(TestError {
        n_grid: n_grid.to_vec(),
        reps,
        e1_hat: k1.iter().map(|&k| k as f64 / reps as f64).collect(),
        e2_hat: k2.iter().map(|&k| k as f64 / reps as f64).collect(),
        e1_star,
        e2_star,
        sum_star,
        prefactor,
        target,
    })
}
