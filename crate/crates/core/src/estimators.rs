//! Location estimators for location-shift families.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{DensityModel, EdgeProfile, SampleBatch};
use crate::num::fmt12;
use crate::optimize::bisect_transition;

/// Tolerance on `θ` for the bisection-based estimators.
pub const THETA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawSpec")]
pub enum EstimatorSpec {
    /// `min xᵢ − a`.
    MinShift,
    /// `max xᵢ − b`.
    MaxShift,
    /// `λ·min_shift + (1−λ)·max_shift`.
    Cc { lambda: f64 },
    /// Maximum likelihood.
    Mle,
    /// Likelihood-ratio estimator with half-width `ε`.
    Lr { epsilon: f64 },
    /// `min_shift − ε`.
    ShiftedMin { epsilon: f64 },
}

/// Flat JSON form; serde's tagged enums ignore stray fields on unit variants.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: String,
    lambda: Option<f64>,
    epsilon: Option<f64>,
}

impl TryFrom<RawSpec> for EstimatorSpec {
    type Error = String;

    fn try_from(r: RawSpec) -> std::result::Result<Self, String> {
        let spec = match (r.kind.as_str(), r.lambda, r.epsilon) {
            ("min_shift", None, None) => EstimatorSpec::MinShift,
            ("max_shift", None, None) => EstimatorSpec::MaxShift,
            ("mle", None, None) => EstimatorSpec::Mle,
            ("cc", Some(lambda), None) => EstimatorSpec::Cc { lambda },
            ("lr", None, Some(epsilon)) => EstimatorSpec::Lr { epsilon },
            ("shifted_min", None, Some(epsilon)) => EstimatorSpec::ShiftedMin { epsilon },
            (k @ ("min_shift" | "max_shift" | "mle" | "cc" | "lr" | "shifted_min"), _, _) => {
                return Err(format!("estimator `{k}` has missing or extra parameters"))
            }
            (k, _, _) => return Err(format!("unknown estimator kind `{k}`")),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl EstimatorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EstimatorSpec::Cc { lambda } if !(lambda > 0.0 && lambda < 1.0) => {
                Err(Error::invalid(format!("cc: lambda = {lambda} must lie in (0, 1)")))
            }
            EstimatorSpec::Lr { epsilon } | EstimatorSpec::ShiftedMin { epsilon }
                if !(epsilon > 0.0 && epsilon.is_finite()) =>
            {
                Err(Error::invalid(format!("{}: epsilon = {epsilon} must be positive", self.kind_name())))
            }
            _ => Ok(()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            EstimatorSpec::MinShift => "min_shift",
            EstimatorSpec::MaxShift => "max_shift",
            EstimatorSpec::Cc { .. } => "cc",
            EstimatorSpec::Mle => "mle",
            EstimatorSpec::Lr { .. } => "lr",
            EstimatorSpec::ShiftedMin { .. } => "shifted_min",
        }
    }

    /// Whether the estimator is indexed by the target precision `ε`.
    pub fn is_eps_indexed(&self) -> bool {
        matches!(self, EstimatorSpec::Lr { .. } | EstimatorSpec::ShiftedMin { .. })
    }

    /// The same estimator re-indexed to precision `eps` (no-op for fixed ones).
    pub fn at_epsilon(&self, eps: f64) -> EstimatorSpec {
        match self {
            EstimatorSpec::Lr { .. } => EstimatorSpec::Lr { epsilon: eps },
            EstimatorSpec::ShiftedMin { .. } => EstimatorSpec::ShiftedMin { epsilon: eps },
            other => *other,
        }
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EstimatorSpec::Cc { lambda } => write!(f, "cc({})", fmt12(lambda)),
            EstimatorSpec::Lr { epsilon } => write!(f, "lr({})", fmt12(epsilon)),
            EstimatorSpec::ShiftedMin { epsilon } => write!(f, "shifted_min({})", fmt12(epsilon)),
            other => f.write_str(other.kind_name()),
        }
    }
}

impl FromStr for EstimatorSpec {
    type Err = Error;

    /// Parses the display form, e.g. `cc(0.5)` or `mle`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parse(format!("missing `)` in estimator `{s}`")))?;
                let v: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad parameter in estimator `{s}`")))?;
                (&s[..i], Some(v))
            }
            None => (s, None),
        };
        let spec = match (name, arg) {
            ("min_shift", None) => EstimatorSpec::MinShift,
            ("max_shift", None) => EstimatorSpec::MaxShift,
            ("mle", None) => EstimatorSpec::Mle,
            ("cc", Some(lambda)) => EstimatorSpec::Cc { lambda },
            ("lr", Some(epsilon)) => EstimatorSpec::Lr { epsilon },
            ("shifted_min", Some(epsilon)) => EstimatorSpec::ShiftedMin { epsilon },
            ("cc" | "lr" | "shifted_min", None) => {
                return Err(Error::Parse(format!("estimator `{name}` needs a parameter")))
            }
            ("min_shift" | "max_shift" | "mle", Some(_)) => {
                return Err(Error::Parse(format!("estimator `{name}` takes no parameter")))
            }
            _ => return Err(Error::Parse(format!("unknown estimator `{name}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Bracket reported by the likelihood-ratio estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrBracket {
    /// `sup{z : k(z) < 0}`.
    pub sup_negative: f64,
    /// `inf{z : k(z) > 0}`.
    pub inf_positive: f64,
    /// `k < 0` on the whole domain (half-line case).
    pub all_negative: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateDiagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ml_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_bracket: Option<LrBracket>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub diagnostics: EstimateDiagnostics,
}

/// Reason attached to refusals of likelihood-based estimators.
pub const GATE_REASON: &str = "log-concavity gate";

/// Check that `spec` is applicable to `model` at all.
pub fn check_applicable(spec: &EstimatorSpec, model: &DensityModel) -> Result<()> {
    spec.validate()?;
    let name = spec.to_string();
    let a_finite = model.support.lower.is_finite();
    let b_finite = model.support.upper.is_finite();
    match spec {
        EstimatorSpec::MinShift | EstimatorSpec::ShiftedMin { .. } if !a_finite => {
            Err(Error::refused(name, "support has no finite lower end"))
        }
        EstimatorSpec::MaxShift if !b_finite => Err(Error::refused(name, "support has no finite upper end")),
        EstimatorSpec::Cc { .. } if !(a_finite && b_finite) => Err(Error::refused(name, "support is unbounded")),
        EstimatorSpec::Mle if !(model.flags.log_concave || model.flags.monotone_decreasing) => {
            Err(Error::refused(name, GATE_REASON))
        }
        EstimatorSpec::Lr { .. } if !model.flags.log_concave => Err(Error::refused(name, GATE_REASON)),
        _ => Ok(()),
    }
}

/// Point estimate of the shift from `sample`.
pub fn point_estimate(spec: &EstimatorSpec, model: &DensityModel, sample: &SampleBatch) -> Result<Estimate> {
    estimate_values(spec, model, &sample.values)
}

/// [`point_estimate`] on a raw slice of observations.
pub fn estimate_values(spec: &EstimatorSpec, model: &DensityModel, values: &[f64]) -> Result<Estimate> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    check_applicable(spec, model)?;
    let (mn, mx) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let lower_est = mn - model.support.lower;
    let upper_est = mx - model.support.upper;
    let plain = |value: f64| Estimate {
        value,
        diagnostics: EstimateDiagnostics::default(),
    };
    let est = match *spec {
        EstimatorSpec::MinShift => plain(lower_est),
        EstimatorSpec::MaxShift => plain(upper_est),
        EstimatorSpec::Cc { lambda } => plain(lambda * lower_est + (1.0 - lambda) * upper_est),
        EstimatorSpec::ShiftedMin { epsilon } => plain(lower_est - epsilon),
        EstimatorSpec::Mle => mle(model, values, upper_est, lower_est),
        EstimatorSpec::Lr { epsilon } => lr(model, values, epsilon, upper_est, lower_est)?,
    };
    if !est.value.is_finite() {
        return Err(Error::Domain(format!("{spec} produced a non-finite estimate")));
    }
    Ok(est)
}

/// Boundary of a predicate that is monotone (false then true) on `(lo, hi)`.
/// Either end may be infinite; `start` must be finite and inside. Returns
/// `lo` if the predicate holds everywhere and `hi` if it never holds.
fn monotone_boundary<P: FnMut(f64) -> bool>(mut pred: P, lo: f64, hi: f64, start: f64, scale: f64, evals: &mut usize) -> f64 {
    let mut p = |x: f64| {
        *evals += 1;
        pred(x)
    };
    // Find a finite bracket [l, r] with pred(l) false and pred(r) true.
    let (l, r) = if p(start) {
        let mut r = start;
        let mut step = scale;
        loop {
            let l = if lo.is_finite() && start - step <= lo {
                lo
            } else {
                start - step
            };
            if l == lo {
                break (lo, r);
            }
            if !p(l) {
                break (l, r);
            }
            r = l;
            step *= 2.0;
            if step > 1e300 {
                return lo;
            }
        }
    } else {
        let mut l = start;
        let mut step = scale;
        loop {
            let r = if hi.is_finite() && start + step >= hi {
                hi
            } else {
                start + step
            };
            if r == hi {
                break (l, hi);
            }
            if p(r) {
                break (l, r);
            }
            l = r;
            step *= 2.0;
            if step > 1e300 {
                return hi;
            }
        }
    };
    // Open ends are never evaluated: bisection only probes interior midpoints.
    // A transition within THETA_TOL of an open end is that end: there the
    // sample extremes meet the support edge, and `x − z ∓ ε` is resolved only
    // to roundoff.
    let b = bisect_transition(&mut p, l, r, THETA_TOL);
    if l == lo && b - l <= THETA_TOL {
        return lo;
    }
    if r == hi && r - b <= THETA_TOL {
        return hi;
    }
    b
}

fn interior_start(lo: f64, hi: f64, fallback: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => fallback,
    }
}

/// Maximum likelihood via the sign changes of the score sum, which is
/// nonincreasing in `θ` for log-concave models.
fn mle(model: &DensityModel, values: &[f64], lo: f64, hi: f64) -> Estimate {
    if model.flags.monotone_decreasing {
        return Estimate {
            value: hi,
            diagnostics: EstimateDiagnostics {
                ml_iterations: Some(0),
                notes: vec!["monotone density: maximum likelihood equals min_shift".into()],
                ..Default::default()
            },
        };
    }
    let score_sum = |theta: f64| values.iter().map(|&x| model.score(x - theta)).sum::<f64>();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let start = interior_start(lo, hi, mean);
    let scale = model.scale();
    let mut evals = 0;
    // sup{θ : S(θ) > 0} and inf{θ : S(θ) < 0}.
    let upper_pos = monotone_boundary(|t| score_sum(t) <= 0.0, lo, hi, start, scale, &mut evals);
    let lower_neg = monotone_boundary(|t| score_sum(t) < 0.0, lo, hi, start, scale, &mut evals);
    Estimate {
        value: 0.5 * (upper_pos + lower_neg),
        diagnostics: EstimateDiagnostics {
            ml_iterations: Some(evals),
            ..Default::default()
        },
    }
}

/// Likelihood-ratio estimator: midpoint of `sup{z : k(z) < 0}` and
/// `inf{z : k(z) > 0}` for
/// `k(z) = (1/n) Σ [log f(xᵢ − z + ε) − log f(xᵢ − z − ε)]`,
/// which is nondecreasing in `z` for log-concave `f`.
fn lr(model: &DensityModel, values: &[f64], eps: f64, upper_est: f64, lower_est: f64) -> Result<Estimate> {
    if lower_est - upper_est <= 2.0 * eps {
        return Ok(Estimate {
            value: 0.5 * (lower_est + upper_est),
            diagnostics: EstimateDiagnostics {
                notes: vec!["edge estimates closer than 2ε: midpoint rule".into()],
                ..Default::default()
            },
        });
    }
    let lo = upper_est + eps;
    let hi = lower_est - eps;
    let n = values.len() as f64;
    let k = |z: f64| {
        values
            .iter()
            .map(|&x| model.log_pdf(x - z + eps) - model.log_pdf(x - z - eps))
            .sum::<f64>()
            / n
    };
    let mean = values.iter().sum::<f64>() / n;
    let start = interior_start(lo, hi, mean);
    let scale = model.scale().max(eps);
    let mut evals = 0;
    let sup_negative = monotone_boundary(|z| k(z) >= 0.0, lo, hi, start, scale, &mut evals);
    let inf_positive = monotone_boundary(|z| k(z) > 0.0, lo, hi, start, scale, &mut evals);
    let all_negative = sup_negative == hi && inf_positive == hi;
    let mut notes = Vec::new();
    if all_negative {
        notes.push("k < 0 on the whole domain: estimate is the upper domain end".into());
    }
    Ok(Estimate {
        value: 0.5 * (sup_negative + inf_positive),
        diagnostics: EstimateDiagnostics {
            lr_bracket: Some(LrBracket {
                sup_negative,
                inf_positive,
                all_negative,
            }),
            notes,
            ..Default::default()
        },
    })
}

/// Balancing weight `λ₀ = A₁^{1/κ} / (A₁^{1/κ} + A₂^{1/κ})` for equal edge
/// exponents.
pub fn optimal_lambda(edge: &EdgeProfile) -> Result<f64> {
    if (edge.kappa1 - edge.kappa2).abs() > 1e-12 * edge.kappa1.max(edge.kappa2) {
        return Err(Error::refused(
            "optimal_lambda",
            format!("edge exponents differ ({} vs {})", fmt12(edge.kappa1), fmt12(edge.kappa2)),
        ));
    }
    if !(edge.a1 > 0.0 && edge.a2 > 0.0) {
        return Err(Error::refused("optimal_lambda", "both edge coefficients must be positive"));
    }
    let k = edge.kappa1;
    let (w1, w2) = (edge.a1.powf(1.0 / k), edge.a2.powf(1.0 / k));
    Ok(w1 / (w1 + w2))
}
