//! Relative Rényi entropies `I^s(p‖q) = −log ∫ p^s q^{1−s}` between two
//! shifts of one density, and the Chernoff and Hoeffding exponents built on
//! them.
//!
//! The integral is never formed directly. Writing `r = log q − log p`,
//!
//! ```text
//! 1 − ∫ p^s q^{1−s} = s·P_out + (1−s)·Q_out + ∫_overlap p·φ_s(r),
//! φ_s(r) = (1−s)(e^r − 1) − (e^{(1−s)r} − 1) ≥ 0,
//! ```
//!
//! where `P_out` (`Q_out`) is the mass of `p` (`q`) outside the other
//! support. Every term is nonnegative, so tiny divergences keep full
//! relative accuracy, and the formula stays valid at `s = 0` and `s = 1`
//! where it yields the mass-overlap endpoint limits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{DensityModel, FamilySpec};
use crate::num::{ext_real, ext_real_vec, fmt12, parse_ext_real};
use crate::optimize::golden_max;
use crate::quad::{integrate_edges, Layout, QuadratureConfig};

/// `φ_s(r)` with a series for small `|r|`.
fn phi(s: f64, r: f64) -> f64 {
    let t = 1.0 - s;
    if r.abs() < 0.1 {
        // Σ_{k≥2} t(1 − t^{k−1}) r^k / k!
        let mut sum = 0.0;
        let mut rk = r; // r^k / k!
        let mut tk = 1.0; // t^{k−1}
        for k in 2..40 {
            rk *= r / k as f64;
            tk *= t;
            let term = t * (1.0 - tk) * rk;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        t * r.exp_m1() - (t * r).exp_m1()
    }
}

/// Pointwise `s·p + (1−s)·q − p^s q^{1−s}` from log-densities.
fn deficit_integrand(s: f64, lp: f64, lq: f64) -> f64 {
    match (lp == f64::NEG_INFINITY, lq == f64::NEG_INFINITY) {
        (true, true) => 0.0,
        (true, false) => (1.0 - s) * lq.exp(),
        (false, true) => s * lp.exp(),
        (false, false) => {
            let r = lq - lp;
            if r > 50.0 {
                let v = s * lp.exp() + (1.0 - s) * lq.exp() - (s * lp + (1.0 - s) * lq).exp();
                v.max(0.0)
            } else {
                (lp.exp() * phi(s, r)).max(0.0)
            }
        }
    }
}

/// Integration range and layout for the overlap of the supports of
/// `f(· − θ₁)` and `f(· − θ₂)`; `None` when the supports are disjoint.
pub(crate) fn overlap_layout(
    model: &DensityModel,
    theta1: f64,
    theta2: f64,
    q: &QuadratureConfig,
) -> Option<(f64, f64, Layout)> {
    let (tmin, tmax) = (theta1.min(theta2), theta1.max(theta2));
    let lo = model.support.lower + tmax;
    let hi = model.support.upper + tmin;
    if !(hi > lo) {
        return None;
    }
    let (r_lo, r_hi) = model.effective_range();
    let lo_e = if lo.is_finite() { lo } else { r_lo + tmin };
    let hi_e = if hi.is_finite() { hi } else { r_hi + tmax };
    let delta = tmax - tmin;
    let mut breakpoints = Vec::new();
    for k in [0.01, 0.1, 1.0, 10.0] {
        breakpoints.push(lo_e + k * delta);
        breakpoints.push(hi_e - k * delta);
    }
    for c in model.kinks() {
        breakpoints.push(c + theta1);
        breakpoints.push(c + theta2);
    }
    let left_power = if lo.is_finite() {
        q.power_for_edge(model.edge.kappa1)
    } else {
        1.0
    };
    let right_power = if hi.is_finite() {
        q.power_for_edge(model.edge.kappa2)
    } else {
        1.0
    };
    Some((
        lo_e,
        hi_e,
        Layout {
            breakpoints,
            left_power,
            right_power,
        },
    ))
}

/// Mass of `f(· − θ_from)` outside the support of `f(· − θ_to)`.
fn outside_mass(model: &DensityModel, theta_from: f64, theta_to: f64) -> f64 {
    let d = theta_to - theta_from;
    (model.cdf(model.support.lower + d) + model.sf(model.support.upper + d)).clamp(0.0, 1.0)
}

/// `I^s(f_{θ₁}‖f_{θ₂})` for any `s` in the closed interval `[0, 1]`.
pub(crate) fn renyi_closed(
    model: &DensityModel,
    theta1: f64,
    theta2: f64,
    s: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    if theta1 == theta2 {
        return Ok(0.0);
    }
    let Some((lo, hi, layout)) = overlap_layout(model, theta1, theta2, q) else {
        return Ok(f64::INFINITY);
    };
    let p_out = outside_mass(model, theta1, theta2);
    let q_out = outside_mass(model, theta2, theta1);
    // The overlap starts at the lower end of f_{θmax} and stops at the upper
    // end of f_{θmin}; evaluate those from the exact edge distance.
    let (tmin, tmax) = (theta1.min(theta2), theta1.max(theta2));
    let lower_edge = model.support.lower.is_finite();
    let upper_edge = model.support.upper.is_finite();
    let log_f = |theta: f64, x: f64, dl: f64, dr: f64| {
        if theta == tmax && lower_edge && dl <= dr {
            model.log_pdf_from_lower(dl)
        } else if theta == tmin && upper_edge && dr < dl {
            model.log_pdf_from_upper(dr)
        } else {
            model.log_pdf(x - theta)
        }
    };
    let overlap = integrate_edges(
        |x, dl, dr| deficit_integrand(s, log_f(theta1, x, dl, dr), log_f(theta2, x, dl, dr)),
        lo,
        hi,
        &layout,
        q,
    )?;
    let d = (s * p_out + (1.0 - s) * q_out + overlap.value).clamp(0.0, 1.0);
    Ok(if d >= 1.0 { f64::INFINITY } else { -(-d).ln_1p() })
}

/// Relative Rényi entropy `I^s(f_{θ₁}‖f_{θ₂})` for `0 < s < 1`; `+∞` when
/// the supports are disjoint.
pub fn renyi_divergence(
    model: &DensityModel,
    theta1: f64,
    theta2: f64,
    s: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("Rényi order s = {s} must lie in (0, 1)")));
    }
    q.validate()?;
    renyi_closed(model, theta1, theta2, s, q)
}

/// `s ↦ I^s` on a grid together with its endpoint limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenyiCurve {
    pub model: DensityModel,
    pub theta1: f64,
    pub theta2: f64,
    pub s_grid: Vec<f64>,
    #[serde(with = "ext_real_vec")]
    pub values: Vec<f64>,
    /// `lim_{s→0} I^s = −log ∫_{supp p} q`.
    #[serde(with = "ext_real")]
    pub endpoint_left: f64,
    /// `lim_{s→1} I^s = −log ∫_{supp q} p`.
    #[serde(with = "ext_real")]
    pub endpoint_right: f64,
    pub quadrature: QuadratureConfig,
}

pub(crate) fn check_open_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("{what} is empty")));
    }
    if grid.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
        return Err(Error::invalid(format!("{what} must lie inside (0, 1)")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// Evaluate `I^s` on `s_grid` (strictly increasing inside `(0,1)`).
pub fn renyi_curve(
    model: &DensityModel,
    theta1: f64,
    theta2: f64,
    s_grid: &[f64],
    q: &QuadratureConfig,
) -> Result<RenyiCurve> {
    check_open_grid(s_grid, "s grid")?;
    q.validate()?;
    let values = s_grid
        .par_iter()
        .map(|&s| renyi_closed(model, theta1, theta2, s, q))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RenyiCurve {
        model: model.clone(),
        theta1,
        theta2,
        s_grid: s_grid.to_vec(),
        values,
        endpoint_left: renyi_closed(model, theta1, theta2, 0.0, q)?,
        endpoint_right: renyi_closed(model, theta1, theta2, 1.0, q)?,
        quadrature: *q,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chernoff {
    #[serde(with = "ext_real")]
    pub value: f64,
    pub s_star: f64,
}

impl RenyiCurve {
    /// `I^s` at any `s ∈ [0, 1]`, recomputed from the model.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(self.endpoint_left);
        }
        if s == 1.0 {
            return Ok(self.endpoint_right);
        }
        renyi_closed(&self.model, self.theta1, self.theta2, s, &self.quadrature)
    }

    /// Grid points including both endpoints, as `(s, I^s)`.
    pub fn closed_points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(self.s_grid.len() + 2);
        pts.push((0.0, self.endpoint_left));
        pts.extend(self.s_grid.iter().copied().zip(self.values.iter().copied()));
        pts.push((1.0, self.endpoint_right));
        pts
    }

    /// Serialize as CSV with a leading `# {json}` header line.
    pub fn to_csv_string(&self) -> String {
        let header = serde_json::json!({
            "family": self.model.spec,
            "theta1": self.theta1,
            "theta2": self.theta2,
            "endpoint_left": crate::num::json_num(self.endpoint_left),
            "endpoint_right": crate::num::json_num(self.endpoint_right),
            "quadrature": self.quadrature,
        });
        let mut out = format!("# {header}\ns,I_s\n");
        for (s, v) in self.s_grid.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", fmt12(*s), fmt12(*v)));
        }
        out
    }

    /// Inverse of [`RenyiCurve::to_csv_string`].
    pub fn from_csv_str(text: &str) -> Result<RenyiCurve> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Header {
            family: FamilySpec,
            theta1: f64,
            theta2: f64,
            #[serde(with = "ext_real")]
            endpoint_left: f64,
            #[serde(with = "ext_real")]
            endpoint_right: f64,
            quadrature: QuadratureConfig,
        }
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let json = first
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("curve file must start with a `#` header line".into()))?;
        let h: Header = serde_json::from_str(json.trim())?;
        let (s_grid, values) = parse_two_column_csv(rest, "s", "I_s")?;
        check_open_grid(&s_grid, "s grid")?;
        if values.iter().any(|v| !(*v >= 0.0)) || !(h.endpoint_left >= 0.0 && h.endpoint_right >= 0.0) {
            return Err(Error::Parse("Rényi values must be nonnegative".into()));
        }
        h.quadrature.validate()?;
        Ok(RenyiCurve {
            model: crate::family::build_family(&h.family)?,
            theta1: h.theta1,
            theta2: h.theta2,
            s_grid,
            values,
            endpoint_left: h.endpoint_left,
            endpoint_right: h.endpoint_right,
            quadrature: h.quadrature,
        })
    }
}

/// Read a headed two-column CSV of extended reals.
pub(crate) fn parse_two_column_csv(text: &str, c1: &str, c2: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != c1 || &headers[1] != c2 {
        return Err(Error::Parse(format!("expected columns `{c1},{c2}`")));
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse("expected two fields per row".into()));
        }
        let x = parse_ext_real(&rec[0]).ok_or_else(|| Error::Parse(format!("bad number `{}`", &rec[0])))?;
        let y = parse_ext_real(&rec[1]).ok_or_else(|| Error::Parse(format!("bad number `{}`", &rec[1])))?;
        a.push(x);
        b.push(y);
    }
    Ok((a, b))
}

/// Index of the maximum of `values`, preferring interior entries on ties.
fn argmax_prefer_interior(values: &[f64]) -> usize {
    let n = values.len();
    let mut best = if n > 2 { 1 } else { 0 };
    for i in 0..n {
        let interior = i > 0 && i + 1 < n;
        let better = if interior {
            values[i] > values[best]
        } else {
            values[i] > values[best] * (1.0 + 1e-14) + 1e-300
        };
        if better {
            best = i;
        }
    }
    best
}

/// Chernoff exponent `sup_{s∈[0,1]} I^s`, seeded from the grid maximum and
/// refined by golden section (`I^s` is concave in `s`).
pub fn chernoff_exponent(curve: &RenyiCurve) -> Chernoff {
    let pts = curve.closed_points();
    let values: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let i = argmax_prefer_interior(&values);
    let (mut s_star, mut value) = pts[i];
    if value.is_infinite() {
        return Chernoff { value, s_star };
    }
    let lo = pts[i.saturating_sub(1)].0;
    let hi = pts[(i + 1).min(pts.len() - 1)].0;
    if hi > lo {
        let (s, v) = golden_max(|s| curve.eval(s).unwrap_or(f64::NAN), lo, hi, 1e-10);
        if v > value {
            s_star = s;
            value = v;
        }
    }
    Chernoff { value, s_star }
}

/// Hoeffding exponent `sup_{s∈(0,1)} (I^s − s·r)/(1 − s)`; `+∞` whenever
/// `lim_{s→1} I^s > r`.
pub fn hoeffding_exponent(curve: &RenyiCurve, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("Hoeffding threshold r = {r} must be nonnegative")));
    }
    if curve.endpoint_right > r * (1.0 + 1e-12) + 1e-15 {
        return Ok(f64::INFINITY);
    }
    let h = |s: f64, v: f64| (v - s * r) / (1.0 - s);
    let mut pts: Vec<(f64, f64)> = vec![(0.0, curve.endpoint_left)];
    pts.extend(curve.s_grid.iter().copied().zip(curve.values.iter().copied()));
    for k in 2..=8 {
        let s = 1.0 - 10f64.powi(-k);
        if s > *curve.s_grid.last().unwrap_or(&0.0) {
            pts.push((s, curve.eval(s)?));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let vals: Vec<f64> = pts.iter().map(|&(s, v)| h(s, v)).collect();
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = i;
        }
    }
    let mut value = vals[best];
    let lo = pts[best.saturating_sub(1)].0;
    let hi = pts[(best + 1).min(pts.len() - 1)].0;
    if hi > lo {
        let (_, v) = golden_max(
            |s| curve.eval(s).map(|v| h(s, v)).unwrap_or(f64::NAN),
            lo,
            hi,
            1e-12,
        );
        value = value.max(v);
    }
    Ok(value.max(0.0))
}
