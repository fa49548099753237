//! Scaling law `g(ε)`, the normalised limit curve
//! `I^s_g = lim_{ε→0} I^s(f_{θ−ε/2}‖f_{θ+ε/2}) / g(ε)`, and the two upper
//! bounds on the slope of exponential rates built from it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{check_open_grid, renyi_closed};
use crate::error::{Error, Result};
use crate::extrapolate::{richardson_to_zero, Extrapolation};
use crate::family::DensityModel;
use crate::num::{ext_real, ext_real_vec, fmt12};
use crate::optimize::{golden_max, golden_min, grid_refine_min};
use crate::quad::QuadratureConfig;
use crate::stats::ols_line;

/// Relative tolerance of the limit-curve Richardson stability check.
pub const EXTRAPOLATION_TOL: f64 = 1e-3;
/// Richardson levels used for limit curves and slopes.
pub const EXTRAPOLATION_LEVELS: usize = 2;
/// Relative tolerance of the coincidence conditions.
pub const COINCIDENCE_TOL: f64 = 1e-2;
/// Fits with `r²` below this are flagged as degenerate.
pub const MIN_R_SQUARED: f64 = 0.99;

/// Default ε grid: nine geometric points from 1e-3 down to 1e-5.
pub fn default_eps_grid() -> Vec<f64> {
    (0..9).map(|i| 1e-3 * 10f64.powf(-0.25 * i as f64)).collect()
}

/// `g(ε) ~ ε^κ` fitted from `log I^s` against `log ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    pub kappa_hat: f64,
    pub intercept: f64,
    /// Descending (coarse to fine).
    pub eps_grid: Vec<f64>,
    /// `I^s` at each grid point.
    pub divergences: Vec<f64>,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub source_s: f64,
    /// `r²` fell below [`MIN_R_SQUARED`].
    pub degenerate: bool,
    /// Largest relative deviation of `I(ε_i)/I(ε_{i+1})` from
    /// `(ε_i/ε_{i+1})^κ̂` over consecutive grid points.
    pub ratio_deviation: f64,
    /// User-supplied `g` on `eps_grid`; replaces `ε^κ̂` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tabulated_g: Option<Vec<f64>>,
}

impl ScalingLaw {
    /// `g(ε)`: the power law `ε^κ̂`, or log-log interpolation of the table.
    pub fn g(&self, eps: f64) -> f64 {
        match &self.tabulated_g {
            None => eps.powf(self.kappa_hat),
            Some(table) => {
                let (x, y): (Vec<f64>, Vec<f64>) =
                    self.eps_grid.iter().zip(table).map(|(e, g)| (e.ln(), g.ln())).unzip();
                // Grid is descending; find the bracketing pair or extrapolate.
                let le = eps.ln();
                let n = x.len();
                let mut i = 0;
                while i + 2 < n && le < x[i + 1] {
                    i += 1;
                }
                let w = (le - x[i]) / (x[i + 1] - x[i]);
                (y[i] + w * (y[i + 1] - y[i])).exp()
            }
        }
    }

    /// Replace the power law by a tabulated `g` on the same grid.
    pub fn with_table(mut self, g: Vec<f64>) -> Result<Self> {
        if g.len() != self.eps_grid.len() {
            return Err(Error::invalid("tabulated g must have one value per ε grid point"));
        }
        if g.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("tabulated g values must be positive and finite"));
        }
        if g.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("tabulated g must increase with ε"));
        }
        self.tabulated_g = Some(g);
        Ok(self)
    }
}

fn check_eps_grid(eps_grid: &[f64]) -> Result<Vec<f64>> {
    if eps_grid.len() < 5 {
        return Err(Error::invalid("ε grid needs at least 5 points"));
    }
    if eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::invalid("ε grid values must be positive and finite"));
    }
    let mut grid = eps_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("ε grid values must be distinct"));
    }
    let ratios: Vec<f64> = grid.windows(2).map(|w| (w[0] / w[1]).ln()).collect();
    let r0 = ratios[0];
    if ratios.iter().any(|r| (r - r0).abs() > 1e-6 * r0) {
        return Err(Error::invalid("ε grid must be geometric"));
    }
    Ok(grid)
}

/// Fit the order `κ` of `g` from `I^{1/2}(f_{θ−ε/2}‖f_{θ+ε/2})`.
pub fn fit_order(model: &DensityModel, theta: f64, eps_grid: &[f64], q: &QuadratureConfig) -> Result<ScalingLaw> {
    fit_order_at(model, theta, eps_grid, 0.5, q)
}

/// [`fit_order`] at an arbitrary Rényi order `s ∈ (0,1)`.
pub fn fit_order_at(
    model: &DensityModel,
    theta: f64,
    eps_grid: &[f64],
    s: f64,
    q: &QuadratureConfig,
) -> Result<ScalingLaw> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("Rényi order s = {s} must lie in (0, 1)")));
    }
    q.validate()?;
    let grid = check_eps_grid(eps_grid)?;
    let divergences = grid
        .par_iter()
        .map(|&e| renyi_closed(model, theta - 0.5 * e, theta + 0.5 * e, s, q))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(i) = divergences.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!(
            "I^s at ε = {} is {}; the shifted supports must overlap",
            grid[i], divergences[i]
        )));
    }
    let lx: Vec<f64> = grid.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = divergences.iter().map(|v| v.ln()).collect();
    let fit = ols_line(&lx, &ly)?;
    let kappa_hat = fit.coef[1];
    if !(kappa_hat > 0.0) {
        return Err(Error::Domain(format!("fitted order {kappa_hat} is not positive")));
    }
    let ratio_deviation = grid
        .windows(2)
        .zip(divergences.windows(2))
        .map(|(e, v)| ((v[0] / v[1]) / (e[0] / e[1]).powf(kappa_hat) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ScalingLaw {
        kappa_hat,
        intercept: fit.coef[0],
        eps_grid: grid,
        divergences,
        r_squared: fit.r_squared,
        residuals: fit.residuals,
        source_s: s,
        degenerate: fit.r_squared < MIN_R_SQUARED,
        ratio_deviation,
        tabulated_g: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
struct CurveSource {
    model: DensityModel,
    theta: f64,
    law: ScalingLaw,
    q: QuadratureConfig,
}

impl CurveSource {
    fn extrapolate(&self, s: f64) -> Result<Extrapolation> {
        let raw = self
            .law
            .eps_grid
            .iter()
            .map(|&e| Ok(renyi_closed(&self.model, self.theta - 0.5 * e, self.theta + 0.5 * e, s, &self.q)? / self.law.g(e)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(richardson_to_zero(
            &self.law.eps_grid,
            &raw,
            self.law.kappa_hat,
            EXTRAPOLATION_LEVELS,
            EXTRAPOLATION_TOL,
        ))
    }
}

/// The normalised limit `s ↦ I^s_g` on a grid that always contains `1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCurve {
    pub s_grid: Vec<f64>,
    #[serde(with = "ext_real_vec")]
    pub values: Vec<f64>,
    #[serde(with = "ext_real")]
    pub endpoint_left: f64,
    #[serde(with = "ext_real")]
    pub endpoint_right: f64,
    /// Per grid point, in `s_grid` order.
    pub extrapolation: Vec<Extrapolation>,
    pub kappa: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    source: Option<Box<CurveSource>>,
}

/// Extrapolate `I^s(f_{θ−ε/2}‖f_{θ+ε/2})/g(ε)` to `ε → 0` for each `s`.
/// `1/2` is inserted into `s_grid` when absent.
pub fn limit_curve(
    model: &DensityModel,
    theta: f64,
    law: &ScalingLaw,
    s_grid: &[f64],
    q: &QuadratureConfig,
) -> Result<LimitCurve> {
    check_open_grid(s_grid, "s grid")?;
    q.validate()?;
    let mut grid = s_grid.to_vec();
    if !grid.contains(&0.5) {
        grid.push(0.5);
        grid.sort_by(f64::total_cmp);
    }
    let source = CurveSource {
        model: model.clone(),
        theta,
        law: law.clone(),
        q: *q,
    };
    let mut all: Vec<f64> = vec![0.0];
    all.extend(&grid);
    all.push(1.0);
    let ex = all
        .par_iter()
        .map(|&s| source.extrapolate(s))
        .collect::<Result<Vec<Extrapolation>>>()?;
    let mut warnings = Vec::new();
    for (s, e) in all.iter().zip(&ex) {
        if e.fallback {
            warnings.push(format!(
                "s = {}: non-monotone sequence, using the finest grid value",
                fmt12(*s)
            ));
        } else if !e.stable {
            warnings.push(format!(
                "s = {}: extrapolation not stable (last two estimates {} and {})",
                fmt12(*s),
                fmt12(e.value),
                fmt12(e.previous)
            ));
        }
    }
    let n = all.len();
    Ok(LimitCurve {
        s_grid: grid,
        values: ex[1..n - 1].iter().map(|e| e.value.max(0.0)).collect(),
        endpoint_left: ex[0].value.max(0.0),
        endpoint_right: ex[n - 1].value.max(0.0),
        extrapolation: ex[1..n - 1].to_vec(),
        kappa: law.kappa_hat,
        warnings,
        source: Some(Box::new(source)),
    })
}

impl LimitCurve {
    /// Curve from explicit samples (no model attached; off-grid values are
    /// linearly interpolated).
    pub fn from_values(s_grid: Vec<f64>, values: Vec<f64>, endpoint_left: f64, endpoint_right: f64, kappa: f64) -> Result<Self> {
        check_open_grid(&s_grid, "s grid")?;
        if values.len() != s_grid.len() {
            return Err(Error::invalid("limit curve needs one value per grid point"));
        }
        let extrapolation = values
            .iter()
            .map(|&v| Extrapolation {
                value: v,
                previous: v,
                order: kappa,
                stable: true,
                fallback: false,
            })
            .collect();
        Ok(LimitCurve {
            s_grid,
            values,
            endpoint_left,
            endpoint_right,
            extrapolation,
            kappa,
            warnings: Vec::new(),
            source: None,
        })
    }

    /// Grid points including both endpoints, as `(s, I^s_g)`.
    pub fn closed_points(&self) -> Vec<(f64, f64)> {
        let mut pts = vec![(0.0, self.endpoint_left)];
        pts.extend(self.s_grid.iter().copied().zip(self.values.iter().copied()));
        pts.push((1.0, self.endpoint_right));
        pts
    }

    /// `I^s_g` at any `s ∈ [0,1]`.
    pub fn value_at(&self, s: f64) -> f64 {
        let pts = self.closed_points();
        if let Some(p) = pts.iter().find(|p| p.0 == s) {
            return p.1;
        }
        if let Some(src) = &self.source {
            if let Ok(e) = src.extrapolate(s) {
                return e.value.max(0.0);
            }
        }
        let i = pts.iter().position(|p| p.0 > s).unwrap_or(pts.len() - 1).max(1);
        let (s0, v0) = pts[i - 1];
        let (s1, v1) = pts[i];
        v0 + (s - s0) / (s1 - s0) * (v1 - v0)
    }

    pub fn at_half(&self) -> f64 {
        self.value_at(0.5)
    }

    /// Sup over the closed interval, refined by golden section.
    pub fn sup(&self) -> (f64, f64) {
        let pts = self.closed_points();
        let mut best = 0;
        for (i, p) in pts.iter().enumerate() {
            if p.1 > pts[best].1 {
                best = i;
            }
        }
        let (mut s, mut v) = pts[best];
        let lo = pts[best.saturating_sub(1)].0;
        let hi = pts[(best + 1).min(pts.len() - 1)].0;
        if self.source.is_some() && hi > lo {
            let (gs, gv) = golden_max(|x| self.value_at(x), lo, hi, 1e-6);
            if gv > v {
                s = gs;
                v = gv;
            }
        }
        (v, s)
    }

    /// CSV with a leading `# {json}` header holding endpoints and `κ`.
    pub fn to_csv_string(&self) -> String {
        let header = serde_json::json!({
            "kappa": self.kappa,
            "endpoint_left": crate::num::json_num(self.endpoint_left),
            "endpoint_right": crate::num::json_num(self.endpoint_right),
        });
        let mut out = format!("# {header}\ns,I_s_g,previous,stable,fallback\n");
        for (i, s) in self.s_grid.iter().enumerate() {
            let e = &self.extrapolation[i];
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt12(*s),
                fmt12(self.values[i]),
                fmt12(e.previous),
                e.stable,
                e.fallback
            ));
        }
        out
    }

    /// Parse the `s,I_s_g` columns of [`LimitCurve::to_csv_string`].
    pub fn from_csv_str(text: &str) -> Result<LimitCurve> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Header {
            kappa: f64,
            #[serde(with = "ext_real")]
            endpoint_left: f64,
            #[serde(with = "ext_real")]
            endpoint_right: f64,
        }
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let json = first
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("curve file must start with a `#` header line".into()))?;
        let h: Header = serde_json::from_str(json.trim())?;
        let mut s_grid = Vec::new();
        let mut values = Vec::new();
        let mut rdr = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| {
                rec.get(i)
                    .and_then(crate::num::parse_ext_real)
                    .ok_or_else(|| Error::Parse(format!("bad field {i} in limit curve row")))
            };
            s_grid.push(num(0)?);
            values.push(num(1)?);
        }
        if !(h.kappa > 0.0) {
            return Err(Error::Parse("kappa must be positive".into()));
        }
        LimitCurve::from_values(s_grid, values, h.endpoint_left, h.endpoint_right, h.kappa)
    }
}

/// `ᾱ₁ = 2^κ · sup_{s∈[0,1]} I^s_g`; returns `(value, s_witness)`.
pub fn alpha_bar_1(curve: &LimitCurve, kappa: f64) -> (f64, f64) {
    let (v, s) = curve.sup();
    (2f64.powf(kappa) * v, s)
}

/// `h(s) = I^s_g / (s(1−s)) · (s^{1/(κ−1)} + (1−s)^{1/(κ−1)})^{κ−1}` in
/// log-sum-exp form.
fn alpha2_objective(value: f64, s: f64, kappa: f64) -> f64 {
    if s == 0.5 {
        // Exact at the midpoint, so `h(1/2)` and `ᾱ₁` agree bitwise there.
        return 2f64.powf(kappa) * value;
    }
    let e = 1.0 / (kappa - 1.0);
    let (a, b) = (e * s.ln(), e * (1.0 - s).ln());
    let m = a.max(b);
    let lse = m + ((a - m).exp() + (b - m).exp()).ln();
    value / (s * (1.0 - s)) * ((kappa - 1.0) * lse).exp()
}

/// `κ` within this distance of 1 uses the `κ = 1` branch of `ᾱ₂`.
const KAPPA_ONE_TOL: f64 = 1e-9;

/// `ᾱ₂`: sup of `h` for `κ < 1`, `2·I^{1/2}_g` for `κ = 1`, inf of `h` for
/// `κ > 1`. Returns `(value, s_witness)`.
pub fn alpha_bar_2(curve: &LimitCurve, kappa: f64) -> (f64, f64) {
    if (kappa - 1.0).abs() <= KAPPA_ONE_TOL {
        return (2.0 * curve.at_half(), 0.5);
    }
    let h = |s: f64| alpha2_objective(curve.value_at(s), s, kappa);
    let grid = &curve.s_grid;
    let vals: Vec<f64> = grid
        .iter()
        .zip(&curve.values)
        .map(|(&s, &v)| alpha2_objective(v, s, kappa))
        .collect();
    let pick = |better: &dyn Fn(f64, f64) -> bool| {
        let mut best = 0;
        for i in 0..vals.len() {
            if better(vals[i], vals[best]) {
                best = i;
            }
        }
        best
    };
    let maximize = kappa < 1.0;
    let best = if maximize {
        pick(&|a, b| a > b)
    } else {
        pick(&|a, b| a < b)
    };
    let (mut s, mut v) = (grid[best], vals[best]);
    let lo = if best > 0 { grid[best - 1] } else { 0.5 * grid[0] };
    let hi = if best + 1 < grid.len() {
        grid[best + 1]
    } else {
        0.5 * (1.0 + grid[best])
    };
    if curve.source.is_some() {
        let (gs, gv) = if maximize {
            golden_max(h, lo, hi, 1e-6)
        } else {
            golden_min(h, lo, hi, 1e-6)
        };
        if (maximize && gv > v) || (!maximize && gv < v) {
            s = gs;
            v = gv;
        }
    }
    (v, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsDiagnostics {
    /// `2^κ · I^{1/2}_g = ᾱ₂` within `tolerance`.
    pub half_matches_alpha2: bool,
    #[serde(with = "ext_real")]
    pub sup_limit: f64,
    #[serde(with = "ext_real")]
    pub limit_at_half: f64,
    pub order_holds: bool,
    pub tolerance: f64,
    pub branch: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    #[serde(with = "ext_real")]
    pub alpha_bar_1: f64,
    #[serde(with = "ext_real")]
    pub alpha_bar_2: f64,
    pub kappa: f64,
    pub s_witness_1: f64,
    pub s_witness_2: f64,
    pub coincide: bool,
    /// `sup_s I^s_g = I^{1/2}_g` within the tolerance.
    pub sup_at_half: bool,
    pub diagnostics: BoundsDiagnostics,
}

/// Both bounds and the conditions under which they coincide, at the
/// default relative tolerance.
pub fn coincidence(curve: &LimitCurve, kappa: f64) -> BoundsReport {
    coincidence_with_tol(curve, kappa, COINCIDENCE_TOL)
}

pub fn coincidence_with_tol(curve: &LimitCurve, kappa: f64, tol: f64) -> BoundsReport {
    let (a1, s1) = alpha_bar_1(curve, kappa);
    let (a2, s2) = alpha_bar_2(curve, kappa);
    let (sup, _) = curve.sup();
    let half = curve.at_half();
    let sup_half = (sup - half).abs() <= tol * half;
    let half_alpha2 = (2f64.powf(kappa) * half - a2).abs() <= tol * a2.abs();
    let coincide = if kappa <= 1.0 + KAPPA_ONE_TOL { sup_half } else { sup_half && half_alpha2 };
    let branch = if (kappa - 1.0).abs() <= KAPPA_ONE_TOL {
        "kappa=1"
    } else if kappa < 1.0 {
        "kappa<1"
    } else {
        "kappa>1"
    };
    let order_holds = a1 >= a2 - 1e-9 * a1.abs().max(1.0);
    let mut warnings = curve.warnings.clone();
    if !order_holds {
        warnings.push(format!("alpha_bar_1 = {} is below alpha_bar_2 = {}", fmt12(a1), fmt12(a2)));
    }
    BoundsReport {
        alpha_bar_1: a1,
        alpha_bar_2: a2,
        kappa,
        s_witness_1: s1,
        s_witness_2: s2,
        coincide,
        sup_at_half: sup_half,
        diagnostics: BoundsDiagnostics {
            half_matches_alpha2: half_alpha2,
            sup_limit: sup,
            limit_at_half: half,
            order_holds,
            tolerance: tol,
            branch: branch.to_string(),
            warnings,
        },
    }
}

/// A nonnegative concave function sampled on `(0, 1)`, evaluated by linear
/// interpolation and linear extrapolation past the end samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledConcave {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
}

impl SampledConcave {
    pub fn new(t: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.len() != f.len() {
            return Err(Error::invalid("sampled function needs at least two matching points"));
        }
        check_open_grid(&t, "sample grid")?;
        if f.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("sampled function must be finite and nonnegative"));
        }
        Ok(SampledConcave { t, f })
    }

    /// Sample `f` at `i/n` for `i = 1..n`.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<Self> {
        let t: Vec<f64> = (1..n).map(|i| i as f64 / n as f64).collect();
        let v = t.iter().map(|&x| f(x)).collect();
        Self::new(t, v)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let i = match self.t.iter().position(|&ti| ti > x) {
            Some(0) => 1,
            Some(i) => i,
            None => n - 1,
        };
        let (t0, t1, f0, f1) = (self.t[i - 1], self.t[i], self.f[i - 1], self.f[i]);
        f0 + (x - t0) / (t1 - t0) * (f1 - f0)
    }

    /// Largest chord-below-midpoint violation on the grid.
    pub fn concavity_defect(&self) -> f64 {
        self.t
            .windows(3)
            .zip(self.f.windows(3))
            .map(|(t, f)| {
                let w = (t[1] - t[0]) / (t[2] - t[0]);
                ((1.0 - w) * f[0] + w * f[2] - f[1]).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// `inf_{x>0} sup_{0<t<1} [(s−t)x + (1−s)f(t)]/(1−t)`, which equals `f(s)`
/// for concave nonnegative `f`.
pub fn duality_check(f: &SampledConcave, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s = {s} must lie in (0, 1)")));
    }
    let mut t_grid: Vec<f64> = (1..4000).map(|i| i as f64 / 4000.0).collect();
    t_grid.extend((4..=12).map(|k| 1.0 - 0.5 * 10f64.powf(-(k as f64) / 2.0)));
    t_grid.push(1.0 - 1e-6);
    t_grid.sort_by(f64::total_cmp);
    t_grid.dedup();

    let inner = |x: f64| {
        let g = |t: f64| ((s - t) * x + (1.0 - s) * f.eval(t)) / (1.0 - t);
        let vals: Vec<f64> = t_grid.iter().map(|&t| g(t)).collect();
        let mut best = 0;
        for i in 0..vals.len() {
            if vals[i] > vals[best] {
                best = i;
            }
        }
        let lo = t_grid[best.saturating_sub(1)];
        let hi = t_grid[(best + 1).min(t_grid.len() - 1)];
        let (_, v) = golden_max(g, lo, hi, 1e-12);
        v.max(vals[best])
    };

    let fmax = f.f.iter().fold(0.0_f64, |m, v| m.max(*v));
    let slope = f
        .t
        .windows(2)
        .zip(f.f.windows(2))
        .map(|(t, v)| ((v[1] - v[0]) / (t[1] - t[0])).abs())
        .fold(0.0, f64::max);
    let x_max = fmax + slope + 1.0;
    let x_grid: Vec<f64> = (0..=64).map(|i| x_max * i as f64 / 64.0).collect();
    let (_, v) = grid_refine_min(inner, &x_grid, 1e-10);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_geometric() {
        let g = default_eps_grid();
        assert_eq!(g.len(), 9);
        assert!(check_eps_grid(&g).is_ok());
        assert!((g[8] - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn non_geometric_grid_rejected() {
        assert!(check_eps_grid(&[1e-2, 5e-3, 1e-3, 5e-4, 1e-4]).is_err());
        assert!(check_eps_grid(&[1e-2, 1e-3, 1e-4]).is_err());
    }

    #[test]
    fn alpha2_branches_on_explicit_curves() {
        let s: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        let lin = LimitCurve::from_values(s.clone(), s.clone(), 0.0, 1.0, 1.0).unwrap();
        assert_eq!(alpha_bar_2(&lin, 1.0), (1.0, 0.5));
        let (lo, _) = alpha_bar_2(&lin, 1.0 - 1e-3);
        let (hi, _) = alpha_bar_2(&lin, 1.0 + 1e-3);
        assert!((lo - 1.0).abs() < 1e-2, "{lo}");
        assert!((hi - 1.0).abs() < 1e-2, "{hi}");

        let para: Vec<f64> = s.iter().map(|x| x * (1.0 - x) / 2.0).collect();
        let g = LimitCurve::from_values(s, para, 0.0, 0.0, 2.0).unwrap();
        assert!((alpha_bar_2(&g, 2.0).0 - 0.5).abs() < 1e-12);
        assert!((alpha_bar_1(&g, 2.0).0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tabulated_g_interpolates_exactly_at_nodes() {
        let law = ScalingLaw {
            kappa_hat: 2.0,
            intercept: 0.0,
            eps_grid: vec![1e-2, 1e-3, 1e-4],
            divergences: vec![1.0; 3],
            r_squared: 1.0,
            residuals: vec![0.0; 3],
            source_s: 0.5,
            degenerate: false,
            ratio_deviation: 0.0,
            tabulated_g: None,
        };
        let law = law.with_table(vec![3e-4, 3e-6, 3e-8]).unwrap();
        assert!((law.g(1e-3) / 3e-6 - 1.0).abs() < 1e-12);
        assert!((law.g(1e-5) / 3e-10 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duality_on_constant() {
        let f = SampledConcave::from_fn(|_| 0.7, 100).unwrap();
        assert!((duality_check(&f, 0.4).unwrap() - 0.7).abs() < 1e-6);
    }
}
