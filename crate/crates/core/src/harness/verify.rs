use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::manifest::{now, ArtifactWriter, RunManifest};
use crate::bounds::{coincidence, duality_check, fit_order, limit_curve, SampledConcave};
use crate::divergence::{renyi_curve, renyi_divergence};
use crate::error::Result;
use crate::estimators::{check_applicable, EstimatorSpec};
use crate::family::{build_family, DensityModel, FamilySpec};
use crate::num::ext_real;
use crate::quad::QuadratureConfig;
use crate::rates::{
    exact_rate, mc_rate, mle_integral_rate, mle_rate_lower_bound, slope_report, test_exponents, MleForm, Side,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub name: String,
    pub status: Status,
    #[serde(with = "ext_real")]
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub entries: Vec<VerifyEntry>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyReport {
    /// Record a check; it passes iff `measured < tolerance` strictly.
    pub fn push(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        let status = if measured < tolerance { Status::Pass } else { Status::Fail };
        match status {
            Status::Pass => self.passed += 1,
            Status::Fail => self.failed += 1,
        }
        self.entries.push(VerifyEntry {
            name: name.into(),
            status,
            measured,
            tolerance,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Builtin families covered by the default suite.
pub fn builtin_families() -> Vec<FamilySpec> {
    vec![
        FamilySpec::uniform(),
        FamilySpec::exponential(),
        FamilySpec::gaussian(),
        FamilySpec::beta(0.5, 0.5),
        FamilySpec::beta(2.0, 3.0),
        FamilySpec::beta(2.0, 2.0),
        FamilySpec::triangular(),
    ]
}

/// Largest violation of `2s·I^{1/2} ≤ I^s ≤ 2(1−s)·I^{1/2}` (mirrored for
/// `s > 1/2`) over `points`, relative to `I^{1/2}`.
pub fn sandwich_violation(points: &[(f64, f64)], half: f64) -> f64 {
    if half.is_infinite() {
        // Disjoint supports: every order is infinite.
        return if points.iter().all(|p| p.1.is_infinite()) { 0.0 } else { f64::INFINITY };
    }
    let scale = half.max(f64::MIN_POSITIVE);
    points
        .iter()
        .filter(|(s, _)| *s > 0.0 && *s < 1.0)
        .map(|&(s, v)| {
            let m = s.min(1.0 - s);
            let lower = 2.0 * m * half;
            let upper = 2.0 * (1.0 - m) * half;
            ((lower - v).max(v - upper).max(0.0)) / scale
        })
        .fold(0.0, f64::max)
}

/// Largest amount by which a point lies below the chord of its neighbours,
/// relative to the largest finite value.
pub fn concavity_violation(points: &[(f64, f64)]) -> f64 {
    if points.iter().any(|p| p.1.is_infinite()) {
        return if points.iter().all(|p| p.1.is_infinite()) { 0.0 } else { f64::INFINITY };
    }
    let scale = points.iter().fold(0.0_f64, |m, p| m.max(p.1.abs())).max(f64::MIN_POSITIVE);
    points
        .windows(3)
        .map(|w| {
            let ((s0, v0), (s1, v1), (s2, v2)) = (w[0], w[1], w[2]);
            let a = (s1 - s0) / (s2 - s0);
            ((1.0 - a) * v0 + a * v2 - v1).max(0.0) / scale
        })
        .fold(0.0, f64::max)
}

/// `|a − b| / |a|`, zero when both are the same infinity.
fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)
}

/// The concave test functions of the duality check.
pub fn duality_functions() -> Vec<(&'static str, fn(f64) -> f64)> {
    vec![
        ("parabola", |t| t * (1.0 - t)),
        ("tent", |t: f64| t.min(1.0 - t)),
        ("constant", |_| 0.7),
    ]
}

pub const DUALITY_S: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn curve_checks(r: &mut VerifyReport, c: &ExperimentConfig, model: &DensityModel, q: &QuadratureConfig) -> Result<()> {
    let label = model.label();
    let mut shifts = vec![c.curve_shift, 0.05, 1.0];
    shifts.sort_by(f64::total_cmp);
    shifts.dedup();
    for shift in shifts {
        let (t1, t2) = (c.theta, c.theta + shift);
        let curve = renyi_curve(model, t1, t2, &c.s_grid, q)?;
        let half = renyi_divergence(model, t1, t2, 0.5, q)?;
        let pts = curve.closed_points();
        r.push(
            format!("sandwich/{label}/shift={shift}"),
            sandwich_violation(&pts, half),
            c.tolerance("sandwich"),
        );
        r.push(
            format!("concavity/{label}/shift={shift}"),
            concavity_violation(&pts),
            c.tolerance("concavity"),
        );
    }
    Ok(())
}

fn bound_checks(r: &mut VerifyReport, c: &ExperimentConfig, model: &DensityModel, q: &QuadratureConfig) -> Result<()> {
    let label = model.label();
    let law = fit_order(model, c.theta, &c.eps_grid, q)?;
    let curve = limit_curve(model, c.theta, &law, &c.s_grid, q)?;
    let b = coincidence(&curve, law.kappa_hat);
    r.push(
        format!("order/{label}"),
        ((b.alpha_bar_2 - b.alpha_bar_1) / b.alpha_bar_1.abs().max(f64::MIN_POSITIVE)).max(0.0),
        c.tolerance("order"),
    );

    let mut specs = c.estimators.clone();
    if !specs.iter().any(|s| matches!(s, EstimatorSpec::Lr { .. })) {
        specs.push(EstimatorSpec::Lr { epsilon: 0.1 });
    }
    let finest = c.eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let mut worst = 0.0_f64;
    for spec in &specs {
        let probe = if spec.is_eps_indexed() { spec.at_epsilon(finest) } else { *spec };
        if check_applicable(&probe, model).is_err() {
            continue;
        }
        let rep = slope_report(spec, model, c.theta, &c.eps_grid, &law, &b, q)?;
        worst = worst.max(rep.slope / b.alpha_bar_1 - 1.0);
        if matches!(spec, EstimatorSpec::Lr { .. }) {
            r.push(
                format!("lr_attains/{label}"),
                rel_gap(b.alpha_bar_1, rep.slope),
                c.tolerance("lr_attains"),
            );
        }
    }
    r.push(format!("slope_bound/{label}"), worst.max(0.0), c.tolerance("slope_bound"));
    Ok(())
}

fn mle_checks(r: &mut VerifyReport, c: &ExperimentConfig, model: &DensityModel, q: &QuadratureConfig) -> Result<()> {
    if !model.flags.log_concave {
        return Ok(());
    }
    let label = model.label();
    let mut eps: Vec<f64> = c.rate_epsilons.clone();
    eps.push(0.25);
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let mut forms = 0.0_f64;
    let mut lower = 0.0_f64;
    for &e in &eps {
        let (ps, _) = mle_integral_rate(model, e, MleForm::PlusShifted, q)?;
        let (pu, _) = mle_integral_rate(model, e, MleForm::PlusUnshifted, q)?;
        let (ms, _) = mle_integral_rate(model, e, MleForm::MinusShifted, q)?;
        let (mu, _) = mle_integral_rate(model, e, MleForm::MinusUnshifted, q)?;
        forms = forms.max(rel_gap(ps, pu)).max(rel_gap(ms, mu));

        let rate = exact_rate(&EstimatorSpec::Mle, model, c.theta, e, q)?;
        let (lb_plus, lb_minus) = mle_rate_lower_bound(model, c.theta, e, q)?;
        for (beta, lb) in [(rate.beta_plus, lb_plus), (rate.beta_minus, lb_minus)] {
            if lb > 0.0 && beta < lb {
                lower = lower.max((lb - beta) / lb);
            }
        }
    }
    r.push(format!("mle_forms/{label}"), forms, c.tolerance("mle_forms"));
    r.push(format!("mle_lower_bound/{label}"), lower, c.tolerance("mle_lower_bound"));
    Ok(())
}

fn mc_checks(r: &mut VerifyReport, c: &ExperimentConfig, q: &QuadratureConfig) -> Result<()> {
    let mc = c.mc();
    let uniform = build_family(&FamilySpec::uniform())?;
    let exponential = build_family(&FamilySpec::exponential())?;
    let shifted = EstimatorSpec::ShiftedMin { epsilon: 0.1 };
    let cells = [
        (&uniform, EstimatorSpec::MinShift),
        (&uniform, EstimatorSpec::MaxShift),
        (&uniform, EstimatorSpec::Cc { lambda: 0.5 }),
        (&uniform, shifted),
        (&exponential, EstimatorSpec::MinShift),
        (&exponential, shifted),
    ];
    for (model, spec) in cells {
        for &eps in &c.rate_epsilons {
            let s = spec.at_epsilon(eps);
            let exact = exact_rate(&s, model, c.theta, eps, q)?;
            let target = match c.mc_side {
                Side::Plus => exact.beta_plus,
                Side::Minus => exact.beta_minus,
                Side::Both => exact.beta(),
            };
            let est = mc_rate(&s, model, c.theta, eps, c.mc_side, &c.n_grid, &mc)?;
            let half = 0.5 * (est.ci_high - est.ci_low);
            let measured = if half.is_finite() && half > 0.0 {
                (est.value - target).abs() / half
            } else if est.ci_low <= target && target <= est.ci_high {
                0.0
            } else {
                f64::INFINITY
            };
            r.push(
                format!("exact_vs_mc/{s}/{}/eps={eps}", model.label()),
                measured,
                c.tolerance("exact_vs_mc"),
            );
        }
    }

    let config_model = build_family(&c.family)?;
    let mut pairs: Vec<(DensityModel, f64, f64)> = vec![
        (build_family(&FamilySpec::uniform())?, 0.0, 0.2),
        (build_family(&FamilySpec::gaussian())?, 0.0, 1.0),
    ];
    for &[a, b] in &c.test_pairs {
        pairs.push((config_model.clone(), a, b));
    }
    for (model, t1, t2) in pairs {
        let te = test_exponents(&model, t1, t2, &c.test_n_grid, &mc, q)?;
        let measured = if te.target > 0.0 {
            (te.sum_star.value - te.target).abs() / te.target
        } else {
            te.sum_star.value.abs()
        };
        r.push(
            format!("chernoff_attainment/{}/{t1}:{t2}", model.label()),
            measured,
            c.tolerance("chernoff_attainment"),
        );
    }
    Ok(())
}

/// Run every check against the builtin families (plus the configured one).
pub fn verify_suite(c: &ExperimentConfig) -> Result<VerifyReport> {
    let q = &c.quadrature;
    let mut families = builtin_families();
    if !families.contains(&c.family) {
        families.push(c.family.clone());
    }
    let mut r = VerifyReport::default();
    for fam in &families {
        let model = build_family(fam)?;
        curve_checks(&mut r, c, &model, q)?;
        bound_checks(&mut r, c, &model, q)?;
        mle_checks(&mut r, c, &model, q)?;
    }
    let mut worst = 0.0_f64;
    for (_, f) in duality_functions() {
        let sampled = SampledConcave::from_fn(f, 4000)?;
        for s in DUALITY_S {
            worst = worst.max((duality_check(&sampled, s)? - f(s)).abs());
        }
    }
    r.push("duality", worst, c.tolerance("duality"));
    mc_checks(&mut r, c, q)?;
    Ok(r)
}

/// Write `verify.json`; the caller exits nonzero iff a check failed.
pub fn run_verify(config: &ExperimentConfig) -> Result<(RunManifest, VerifyReport)> {
    let started = now();
    config
        .validate()
        .map_err(|(k, m)| crate::error::Error::Config(format!("{k}: {m}")))?;
    let report = verify_suite(config)?;
    let dir = config.resolved_output_dir();
    let mut out = ArtifactWriter::new(&dir)?;
    out.write_json("verify.json", &report)?;
    let warnings = report
        .entries
        .iter()
        .filter(|e| e.status == Status::Fail)
        .map(|e| format!("check failed: {}", e.name))
        .collect();
    let manifest = out.finish("verify", config, started, warnings)?;
    Ok((manifest, report))
}
