use serde::{Deserialize, Serialize};

use super::{RateMethod, RatePair, SwappedLimits};
use crate::divergence::{chernoff_exponent, renyi_curve};
use crate::error::{Error, Result};
use crate::estimators::{check_applicable, EstimatorSpec, GATE_REASON};
use crate::family::DensityModel;
use crate::optimize::golden_max;
use crate::quad::{log_integral_exp, QuadratureConfig};

/// `−log ∫_{y}^{b} f` without cancellation.
fn neg_log_sf(model: &DensityModel, y: f64) -> f64 {
    let c = model.cdf(y);
    if c < 0.5 {
        -(-c).ln_1p()
    } else {
        neg_log(model.sf(y))
    }
}

/// `−log ∫_{a}^{y} f` without cancellation.
fn neg_log_cdf(model: &DensityModel, y: f64) -> f64 {
    let s = model.sf(y);
    if s < 0.5 {
        -(-s).ln_1p()
    } else {
        neg_log(model.cdf(y))
    }
}

fn neg_log(p: f64) -> f64 {
    if p <= 0.0 {
        f64::INFINITY
    } else {
        -p.ln()
    }
}

fn closed(beta_plus: f64, beta_minus: f64, eps: f64, theta: f64, swapped: (f64, f64)) -> RatePair {
    RatePair {
        beta_plus,
        beta_minus,
        method: RateMethod::ClosedForm,
        epsilon: eps,
        theta,
        swapped_limits: Some(SwappedLimits {
            beta_plus: swapped.0,
            beta_minus: swapped.1,
        }),
        notes: Vec::new(),
    }
}

/// Default Rényi grid for Chernoff evaluations inside rate computations.
fn chernoff_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 / 20.0).collect()
}

/// Exact exponential rates `(β⁺, β⁻)` of `spec` at precision `epsilon`.
///
/// The rates are shift invariant, so `theta` is only recorded.
pub fn exact_rate(
    spec: &EstimatorSpec,
    model: &DensityModel,
    theta: f64,
    epsilon: f64,
    q: &QuadratureConfig,
) -> Result<RatePair> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon = {epsilon} must be positive")));
    }
    check_applicable(spec, model)?;
    q.validate()?;
    let a = model.support.lower;
    let b = model.support.upper;
    let inf = f64::INFINITY;
    Ok(match *spec {
        EstimatorSpec::MinShift => closed(
            neg_log_sf(model, a + epsilon),
            inf,
            epsilon,
            theta,
            (neg_log_cdf(model, b - epsilon), inf),
        ),
        EstimatorSpec::MaxShift => closed(
            inf,
            neg_log_cdf(model, b - epsilon),
            epsilon,
            theta,
            (inf, neg_log_sf(model, a + epsilon)),
        ),
        EstimatorSpec::Cc { lambda } => closed(
            neg_log_sf(model, a + epsilon / lambda),
            neg_log_cdf(model, b - epsilon / (1.0 - lambda)),
            epsilon,
            theta,
            (
                neg_log_cdf(model, b - epsilon / (1.0 - lambda)),
                neg_log_sf(model, a + epsilon / lambda),
            ),
        ),
        EstimatorSpec::ShiftedMin { epsilon: e0 } => closed(
            neg_log_sf(model, a + epsilon + e0),
            if epsilon >= e0 { inf } else { 0.0 },
            epsilon,
            theta,
            (neg_log_cdf(model, b - epsilon - e0), if epsilon >= e0 { inf } else { 0.0 }),
        ),
        EstimatorSpec::Mle => mle_rate(model, theta, epsilon, q)?,
        EstimatorSpec::Lr { .. } => {
            let curve = renyi_curve(model, theta - epsilon, theta + epsilon, &chernoff_grid(), q)?;
            let c = chernoff_exponent(&curve);
            RatePair {
                beta_plus: c.value,
                beta_minus: c.value,
                method: RateMethod::ChernoffEquiv,
                epsilon,
                theta,
                swapped_limits: None,
                notes: vec![format!(
                    "Chernoff exponent of shifts ±ε (s* = {}); only min(β+, β-) is identified",
                    crate::num::fmt12(c.s_star)
                )],
            }
        }
    })
}

fn mle_rate(model: &DensityModel, theta: f64, epsilon: f64, q: &QuadratureConfig) -> Result<RatePair> {
    if model.flat_log_density() {
        let mut r = exact_rate(&EstimatorSpec::Cc { lambda: 0.5 }, model, theta, epsilon, q)?;
        r.notes.push("flat likelihood: the midpoint rule makes maximum likelihood equal cc(0.5)".into());
        return Ok(r);
    }
    if model.flags.monotone_decreasing {
        let mut r = exact_rate(&EstimatorSpec::MinShift, model, theta, epsilon, q)?;
        r.notes.push("monotone density: maximum likelihood equals min_shift".into());
        return Ok(r);
    }
    let (bp, tp) = mle_integral_rate(model, epsilon, MleForm::PlusShifted, q)?;
    let (bm, tm) = mle_integral_rate(model, epsilon, MleForm::MinusShifted, q)?;
    Ok(RatePair {
        beta_plus: bp,
        beta_minus: bm,
        method: RateMethod::QuadratureOpt,
        epsilon,
        theta,
        swapped_limits: None,
        notes: vec![format!(
            "t* = {} (plus), {} (minus)",
            crate::num::fmt12(tp),
            crate::num::fmt12(tm)
        )],
    })
}

/// The four equivalent integral representations of the maximum-likelihood
/// rates, as `sup_{t≥0} −log ∫ exp(±t·(log f)′(·)) f(·) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MleForm {
    /// `β⁺`: `∫_{a+ε}^{b} exp(−t (log f)′(x−ε)) f(x) dx`.
    PlusShifted,
    /// `β⁺`: `∫_{a}^{b−ε} exp(−t (log f)′(x)) f(x+ε) dx`.
    PlusUnshifted,
    /// `β⁻`: `∫_{a}^{b−ε} exp(t (log f)′(x+ε)) f(x) dx`.
    MinusShifted,
    /// `β⁻`: `∫_{a+ε}^{b} exp(t (log f)′(x)) f(x−ε) dx`.
    MinusUnshifted,
}

/// `t` grid: zero plus a logarithmic sweep of `[1e-4, 1e4]`.
fn t_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend((0..=80).map(|i| 10f64.powf(-4.0 + 0.1 * i as f64)));
    g
}

/// Evaluate one integral representation of the maximum-likelihood rate;
/// returns `(β, t*)`. `β = +∞` when the supremum runs off the `t` grid.
pub fn mle_integral_rate(
    model: &DensityModel,
    epsilon: f64,
    form: MleForm,
    q: &QuadratureConfig,
) -> Result<(f64, f64)> {
    if !model.flags.log_concave {
        return Err(Error::refused("mle", GATE_REASON));
    }
    let a = model.support.lower;
    let b = model.support.upper;
    let (lo, hi) = match form {
        MleForm::PlusShifted | MleForm::MinusUnshifted => (a + epsilon, b),
        MleForm::PlusUnshifted | MleForm::MinusShifted => (a, b - epsilon),
    };
    if !(hi > lo) {
        return Ok((f64::INFINITY, f64::NAN));
    }
    let center = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + model.scale(),
        (false, true) => hi - model.scale(),
        (false, false) => 0.0,
    };
    let mut kinks = Vec::new();
    for c in model.kinks() {
        kinks.extend([c, c - epsilon, c + epsilon]);
    }
    let log_integral = |t: f64| -> Result<f64> {
        let h = |x: f64| match form {
            MleForm::PlusShifted => exp_arg(-t, model.dlog_pdf(x - epsilon)) + model.log_pdf(x),
            MleForm::PlusUnshifted => exp_arg(-t, model.dlog_pdf(x)) + model.log_pdf(x + epsilon),
            MleForm::MinusShifted => exp_arg(t, model.dlog_pdf(x + epsilon)) + model.log_pdf(x),
            MleForm::MinusUnshifted => exp_arg(t, model.dlog_pdf(x)) + model.log_pdf(x - epsilon),
        };
        log_integral_exp(h, lo, hi, center, &kinks, q)
    };
    // −log ∫ is concave in t, so the sweep stops once past the peak; large t
    // is never evaluated when the optimum is interior.
    let grid = t_grid();
    let mut values: Vec<f64> = Vec::new();
    for &t in &grid {
        let v = -log_integral(t)?;
        values.push(v);
        let k = values.len();
        if k >= 3 && values[k - 1] < values[k - 2] && values[k - 2] < values[k - 3] {
            break;
        }
    }
    let best = (0..values.len())
        .max_by(|&i, &j| values[i].total_cmp(&values[j]).then(j.cmp(&i)))
        .expect("nonempty grid");
    if values[best] == f64::INFINITY {
        return Ok((f64::INFINITY, grid[best]));
    }
    if best + 1 == grid.len() {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let failure = std::cell::RefCell::new(None);
    let objective = |t: f64| match log_integral(t) {
        Ok(v) => -v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let lo_t = if best == 0 { 0.0 } else { grid[best - 1] };
    let (gt, gv) = golden_max(objective, lo_t, grid[best + 1], 1e-10 * grid[best + 1]);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (t_star, value) = if gv > values[best] { (gt, gv) } else { (grid[best], values[best]) };
    Ok((value.max(0.0), t_star))
}

/// `c·d` with `0·(±∞) = 0`, so `t = 0` ignores infinite log-derivatives.
fn exp_arg(c: f64, d: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        let v = c * d;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

/// Chernoff lower bounds `sup_s I^s(f_θ‖f_{θ+ε})` and
/// `sup_s I^s(f_{θ−ε}‖f_θ)` on the maximum-likelihood rates.
pub fn mle_rate_lower_bound(
    model: &DensityModel,
    theta: f64,
    epsilon: f64,
    q: &QuadratureConfig,
) -> Result<(f64, f64)> {
    if !model.flags.log_concave {
        return Err(Error::refused("mle", GATE_REASON));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon = {epsilon} must be nonnegative")));
    }
    if epsilon == 0.0 {
        return Ok((0.0, 0.0));
    }
    let grid = chernoff_grid();
    let plus = chernoff_exponent(&renyi_curve(model, theta, theta + epsilon, &grid, q)?);
    let minus = chernoff_exponent(&renyi_curve(model, theta - epsilon, theta, &grid, q)?);
    Ok((plus.value, minus.value))
}
