//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature on finite intervals.
//!
//! Integrable algebraic endpoint singularities are smoothed by the power
//! substitution `x = a + w·u^m` (and its mirror at the right end) before the
//! adaptive bisection runs. Caller-supplied breakpoints seed the initial
//! partition so that narrow features near edges are never straddled.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::golden_max;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Substitution exponent `m` at singular edges. `None` lets the caller
    /// derive it from the edge exponent (`m = 1/κ` for `κ < 1`).
    #[serde(default)]
    pub edge_power: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-30,
            rel_tol: 1e-10,
            max_subdivisions: 5000,
            edge_power: None,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be at least 1"));
        }
        if let Some(m) = self.edge_power {
            if !(m >= 1.0 && m.is_finite()) {
                return Err(Error::invalid("edge_power must be a finite value >= 1"));
            }
        }
        Ok(())
    }

    /// Substitution exponent for an edge with density exponent `kappa`.
    ///
    /// `κ < 1` uses `1/κ`, which makes `(x−a)^{κ−1} dx` bounded. `κ > 1`
    /// uses 2: overlap integrands then behave like `(x−a)^{(κ−1)(1−s)}`,
    /// whose fractional power is softened by the square.
    pub fn power_for_edge(&self, kappa: f64) -> f64 {
        match self.edge_power {
            Some(m) => m,
            None if kappa > 0.0 && kappa < 1.0 => 1.0 / kappa,
            None if kappa > 1.0 => 2.0,
            None => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
    pub subdivisions: usize,
}

/// Extra structure for [`integrate_with`].
#[derive(Debug, Clone, Default)]
pub struct Layout {
    pub breakpoints: Vec<f64>,
    /// Substitution exponent at the left end (1 = none).
    pub left_power: f64,
    /// Substitution exponent at the right end (1 = none).
    pub right_power: f64,
}

impl Layout {
    pub fn with_breakpoints(breakpoints: Vec<f64>) -> Self {
        Layout {
            breakpoints,
            left_power: 1.0,
            right_power: 1.0,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn gk21<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = g(center);
    let mut res_k = f_center * WGK[10];
    let mut res_abs = res_k.abs();
    let mut res_g = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jj = 2 * j + 1;
        let dx = half * XGK[jj];
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        fv1[jj] = f1;
        fv2[jj] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jj] * (f1 + f2);
        res_abs += WGK[jj] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jj = 2 * j;
        let dx = half * XGK[jj];
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        fv1[jj] = f1;
        fv2[jj] = f2;
        res_k += WGK[jj] * (f1 + f2);
        res_abs += WGK[jj] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    (result, err)
}

#[derive(Clone, Copy)]
enum Map {
    Identity,
    Left { origin: f64, width: f64, m: f64 },
    Right { origin: f64, width: f64, m: f64 },
}

impl Map {
    /// `(x, dx/du, x − lo, hi − x)`; the distance to a mapped edge is exact.
    #[inline]
    fn apply(&self, u: f64, lo: f64, hi: f64) -> (f64, f64, f64, f64) {
        match *self {
            Map::Identity => (u, 1.0, u - lo, hi - u),
            Map::Left { origin, width, m } => {
                let um1 = u.powf(m - 1.0);
                let d = width * um1 * u;
                let x = origin + d;
                (x, width * m * um1, d, hi - x)
            }
            Map::Right { origin, width, m } => {
                let um1 = u.powf(m - 1.0);
                let d = width * um1 * u;
                let x = origin - d;
                (x, width * m * um1, x - lo, d)
            }
        }
    }

    fn inverse(&self, x: f64) -> f64 {
        match *self {
            Map::Identity => x,
            Map::Left { origin, width, m } => ((x - origin) / width).max(0.0).powf(1.0 / m),
            Map::Right { origin, width, m } => ((origin - x) / width).max(0.0).powf(1.0 / m),
        }
    }
}

struct Piece {
    seg: usize,
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrate `f` over the finite interval `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<Integral> {
    integrate_with(f, lo, hi, &Layout::with_breakpoints(Vec::new()), cfg)
}

/// Integrate `f` over the finite interval `[lo, hi]` with breakpoints and
/// optional endpoint power substitutions.
pub fn integrate_with<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    layout: &Layout,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    integrate_edges(|x, _, _| f(x), lo, hi, layout, cfg)
}

/// As [`integrate_with`], but `f(x, x − lo, hi − x)` also receives the
/// distances to both limits, exact inside power-substituted edge pieces.
pub fn integrate_edges<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    layout: &Layout,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "quadrature needs finite limits, got [{lo}, {hi}]"
        )));
    }
    if hi <= lo {
        return Ok(Integral {
            value: 0.0,
            abs_err: 0.0,
            subdivisions: 0,
        });
    }

    // Segments in substituted coordinates.
    let lp = layout.left_power.max(1.0);
    let rp = layout.right_power.max(1.0);
    let mut maps: Vec<(Map, f64, f64)> = Vec::new();
    match (lp > 1.0, rp > 1.0) {
        (false, false) => maps.push((Map::Identity, lo, hi)),
        (true, false) => maps.push((
            Map::Left {
                origin: lo,
                width: hi - lo,
                m: lp,
            },
            0.0,
            1.0,
        )),
        (false, true) => maps.push((
            Map::Right {
                origin: hi,
                width: hi - lo,
                m: rp,
            },
            0.0,
            1.0,
        )),
        (true, true) => {
            let w = 0.5 * (hi - lo);
            maps.push((
                Map::Left {
                    origin: lo,
                    width: w,
                    m: lp,
                },
                0.0,
                1.0,
            ));
            maps.push((
                Map::Right {
                    origin: hi,
                    width: w,
                    m: rp,
                },
                0.0,
                1.0,
            ));
        }
    }
    let mid_split = 0.5 * (lo + hi);

    let bad = Cell::new(None::<f64>);
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Piece> = Vec::new();

    for (seg, &(map, ua, ub)) in maps.iter().enumerate() {
        // Breakpoints inside this segment's x-range, mapped to u.
        let (xa, xb) = match (map, maps.len()) {
            (Map::Left { .. }, 2) => (lo, mid_split),
            (Map::Right { .. }, 2) => (mid_split, hi),
            _ => (lo, hi),
        };
        let mut cuts: Vec<f64> = layout
            .breakpoints
            .iter()
            .copied()
            .filter(|&x| x.is_finite() && x > xa && x < xb)
            .map(|x| map.inverse(x))
            .filter(|&u| u > ua && u < ub)
            .collect();
        cuts.push(ua);
        cuts.push(ub);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let g = |u: f64| {
                let (x, jac, dl, dr) = map.apply(u, lo, hi);
                let v = f(x, dl, dr) * jac;
                if !v.is_finite() && bad.get().is_none() {
                    bad.set(Some(x));
                }
                v
            };
            let (value, err) = gk21(&g, a, b);
            heap.push(Piece {
                seg,
                a,
                b,
                value,
                err,
            });
        }
    }
    if let Some(x) = bad.get() {
        return Err(Error::Domain(format!("integrand is not finite at x = {x:e}")));
    }

    let total = |heap: &BinaryHeap<Piece>, done: &[Piece]| -> (f64, f64) {
        let mut s = Neumaier::default();
        let mut e = 0.0;
        for p in heap.iter().chain(done.iter()) {
            s.add(p.value);
            e += p.err;
        }
        (s.sum(), e)
    };

    let mut subdivisions = heap.len();
    loop {
        let (value, err) = total(&heap, &done);
        let tolerance = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if err <= tolerance || heap.is_empty() {
            if err <= tolerance {
                return Ok(Integral {
                    value,
                    abs_err: err,
                    subdivisions,
                });
            }
            return Err(Error::NonConvergence {
                lo,
                hi,
                abs_err: err,
                tolerance,
                subdivisions,
            });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::NonConvergence {
                lo,
                hi,
                abs_err: err,
                tolerance,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 4.0 * f64::EPSILON * mid.abs() {
            // Interval at machine resolution; keep its estimate.
            done.push(worst);
            continue;
        }
        let map = maps[worst.seg].0;
        let g = |u: f64| {
            let (x, jac, dl, dr) = map.apply(u, lo, hi);
            let v = f(x, dl, dr) * jac;
            if !v.is_finite() && bad.get().is_none() {
                bad.set(Some(x));
            }
            v
        };
        let (v1, e1) = gk21(&g, worst.a, mid);
        let (v2, e2) = gk21(&g, mid, worst.b);
        if let Some(x) = bad.get() {
            return Err(Error::Domain(format!("integrand is not finite at x = {x:e}")));
        }
        heap.push(Piece {
            seg: worst.seg,
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Piece {
            seg: worst.seg,
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        subdivisions += 1;
    }
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

const LOG_DROP: f64 = 120.0;
const SCAN_POINTS: usize = 1024;

fn walk_out<H: Fn(f64) -> f64>(h: &H, start: f64, dir: f64, h_start: f64) -> Option<f64> {
    let mut best = h_start;
    let mut prev = h_start;
    let mut step = 1.0_f64;
    for _ in 0..64 {
        let x = start + dir * step;
        let v = h(x);
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        if v > best {
            best = v;
        }
        if v < best - LOG_DROP && v <= prev {
            return Some(x);
        }
        prev = v;
        step *= 2.0;
    }
    None
}

/// `ln ∫ exp(h(x)) dx` over `(lo, hi)`, evaluated in log space so that huge
/// or tiny exponents neither overflow nor underflow.
///
/// Infinite limits are replaced by the point where `h` has dropped
/// `LOG_DROP` nats below its running maximum; if no such point exists the
/// integral is reported as divergent (`+∞`). `center` must lie inside the
/// domain and is where the outward walk starts.
pub fn log_integral_exp<H: Fn(f64) -> f64>(
    h: H,
    lo: f64,
    hi: f64,
    center: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(hi > lo) {
        return Ok(f64::NEG_INFINITY);
    }
    let h_center = h(center);
    let lo_e = if lo.is_finite() {
        lo
    } else {
        match walk_out(&h, center, -1.0, h_center) {
            Some(x) => x,
            None => return Ok(f64::INFINITY),
        }
    };
    let hi_e = if hi.is_finite() {
        hi
    } else {
        match walk_out(&h, center, 1.0, h_center) {
            Some(x) => x,
            None => return Ok(f64::INFINITY),
        }
    };

    // Locate the peak: uniform scan then a local golden refinement.
    let width = hi_e - lo_e;
    let hs = |x: f64| {
        let v = h(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut best_x = f64::NAN;
    let mut best_h = f64::NEG_INFINITY;
    let cell = width / SCAN_POINTS as f64;
    for i in 0..SCAN_POINTS {
        let x = lo_e + (i as f64 + 0.5) * cell;
        let v = hs(x);
        if v > best_h {
            best_h = v;
            best_x = x;
        }
    }
    for &x in breakpoints.iter().chain(std::iter::once(&center)) {
        if x > lo_e && x < hi_e {
            let v = hs(x);
            if v > best_h {
                best_h = v;
                best_x = x;
            }
        }
    }
    if best_h == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if best_h == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let a = (best_x - cell).max(lo_e);
    let b = (best_x + cell).min(hi_e);
    let (px, ph) = golden_max(hs, a, b, 1e-12 * (1.0 + best_x.abs()));
    if ph > best_h {
        best_h = ph;
        best_x = px;
    }

    let mut cuts: Vec<f64> = breakpoints.to_vec();
    cuts.push(best_x);
    let shift = best_h;
    let integral = integrate_with(
        |x| {
            let v = hs(x) - shift;
            if v == f64::NEG_INFINITY {
                0.0
            } else {
                v.exp()
            }
        },
        lo_e,
        hi_e,
        &Layout::with_breakpoints(cuts),
        cfg,
    )?;
    if integral.value <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(shift + integral.value.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: 1e-13,
            ..QuadratureConfig::default()
        }
    }

    #[test]
    fn smooth_polynomial_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, &cfg()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn inverse_sqrt_singularity_with_substitution() {
        let layout = Layout {
            breakpoints: vec![],
            left_power: 2.0,
            right_power: 1.0,
        };
        let r = integrate_with(|x| 1.0 / x.sqrt(), 0.0, 1.0, &layout, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn both_edges_substituted() {
        // Arcsine density integrates to one.
        let layout = Layout {
            breakpoints: vec![0.25],
            left_power: 2.0,
            right_power: 2.0,
        };
        let f = |x: f64| 1.0 / (std::f64::consts::PI * (x * (1.0 - x)).sqrt());
        let r = integrate_with(f, 0.0, 1.0, &layout, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn narrow_feature_found_through_breakpoints() {
        let f = |x: f64| (-(x - 1e-4).powi(2) / 1e-12).exp();
        // A peak is only visible to the rule from a piece comparable to its width.
        let layout = Layout::with_breakpoints(vec![9e-5, 1e-4, 1.1e-4, 1e-3]);
        let r = integrate_with(f, 0.0, 1.0, &layout, &cfg()).unwrap();
        let exact = (std::f64::consts::PI * 1e-12).sqrt();
        assert!((r.value - exact).abs() < 1e-12 * exact.max(1e-300) + 1e-20);
    }

    #[test]
    fn subdivision_limit_is_reported() {
        let tight = QuadratureConfig {
            max_subdivisions: 2,
            ..QuadratureConfig::default()
        };
        let err = integrate(|x| x.abs().sqrt().recip().min(1e9), -1.0, 1.0, &tight).unwrap_err();
        assert!(err.is_numeric());
    }

    #[test]
    fn nan_integrand_is_an_error() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, &cfg()).is_err());
    }

    #[test]
    fn log_integral_gaussian_mgf() {
        // ln ∫ exp(t x) φ(x) dx = t²/2, even far out where the mass moves.
        for &t in &[0.0, 1.0, 30.0, 200.0] {
            let h = |x: f64| t * x - 0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln();
            let v = log_integral_exp(h, f64::NEG_INFINITY, f64::INFINITY, 0.0, &[], &cfg()).unwrap();
            assert!((v - 0.5 * t * t).abs() < 1e-9 * (1.0 + t * t), "t={t} v={v}");
        }
    }

    #[test]
    fn log_integral_divergent() {
        let v = log_integral_exp(|x| 0.1 * x, 0.0, f64::INFINITY, 1.0, &[], &cfg()).unwrap();
        assert_eq!(v, f64::INFINITY);
    }
}
