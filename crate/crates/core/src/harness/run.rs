use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::manifest::{check_manifest, now, ArtifactWriter, RunManifest};
use crate::bounds::{coincidence, fit_order, limit_curve, BoundsReport, LimitCurve, ScalingLaw};
use crate::divergence::renyi_curve;
use crate::error::{Error, Result};
use crate::estimators::{check_applicable, EstimatorSpec};
use crate::family::{build_family, DensityModel};
use crate::num::{fmt12, parse_ext_real};
use crate::rates::{exact_rate, mc_rate, slope_report, Side, SlopeReport};

pub const RATES_HEADER: [&str; 10] = [
    "estimator",
    "theta",
    "epsilon",
    "n",
    "exceedances",
    "reps",
    "beta_hat",
    "ci_low",
    "ci_high",
    "method",
];

/// One line of `rates.csv`. Exact rows leave the sample-size columns empty;
/// refused rows carry `refused: <reason>` as the method.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub estimator: String,
    pub theta: f64,
    pub epsilon: f64,
    pub n: Option<usize>,
    pub exceedances: Option<u64>,
    pub reps: Option<u64>,
    pub beta_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub method: String,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(fmt12).unwrap_or_default()
}

pub fn rates_to_csv(rows: &[RateRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RATES_HEADER)?;
    for r in rows {
        w.write_record([
            r.estimator.clone(),
            fmt12(r.theta),
            fmt12(r.epsilon),
            opt(r.n),
            opt(r.exceedances),
            opt(r.reps),
            opt_num(r.beta_hat),
            opt_num(r.ci_low),
            opt_num(r.ci_high),
            r.method.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Inverse of [`rates_to_csv`].
pub fn parse_rates_csv(text: &str) -> Result<Vec<RateRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(RATES_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("rates header must be `{}`", RATES_HEADER.join(","))));
    }
    let num = |s: &str, col: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            return Ok(None);
        }
        parse_ext_real(s)
            .filter(|v| !v.is_nan())
            .map(Some)
            .ok_or_else(|| Error::Parse(format!("{col}: `{s}` is not a number")))
    };
    let int = |s: &str, col: &str| -> Result<Option<u64>> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{col}: `{s}` is not a count")))
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let req = |v: Option<f64>, col: &str| v.ok_or_else(|| Error::Parse(format!("{col} is required")));
        let estimator = f(0).to_string();
        estimator.parse::<EstimatorSpec>()?;
        rows.push(RateRow {
            estimator,
            theta: req(num(f(1), "theta")?, "theta")?,
            epsilon: req(num(f(2), "epsilon")?, "epsilon")?,
            n: int(f(3), "n")?.map(|v| v as usize),
            exceedances: int(f(4), "exceedances")?,
            reps: int(f(5), "reps")?,
            beta_hat: num(f(6), "beta_hat")?,
            ci_low: num(f(7), "ci_low")?,
            ci_high: num(f(8), "ci_high")?,
            method: f(9).to_string(),
        });
    }
    Ok(rows)
}

struct Bounds {
    law: ScalingLaw,
    curve: LimitCurve,
    report: BoundsReport,
}

fn compute_bounds(config: &ExperimentConfig, model: &DensityModel) -> Result<Bounds> {
    let q = &config.quadrature;
    let law = fit_order(model, config.theta, &config.eps_grid, q)?;
    let curve = limit_curve(model, config.theta, &law, &config.s_grid, q)?;
    let report = coincidence(&curve, law.kappa_hat);
    Ok(Bounds { law, curve, report })
}

fn bounds_warnings(b: &Bounds) -> Vec<String> {
    let mut w = Vec::new();
    if b.law.degenerate {
        w.push(format!("scaling-law fit is poor (r² = {})", fmt12(b.law.r_squared)));
    }
    w.extend(b.report.diagnostics.warnings.iter().cloned());
    w
}

fn start(config: &ExperimentConfig) -> Result<DensityModel> {
    config.validate().map_err(|(k, m)| Error::Config(format!("{k}: {m}")))?;
    build_family(&config.family)
}

/// Rényi curve, scaling law, limit curve and bounds report.
pub fn run_bounds(config: &ExperimentConfig) -> Result<RunManifest> {
    let started = now();
    let model = start(config)?;
    let dir = config.resolved_output_dir();
    let mut out = ArtifactWriter::new(&dir)?;
    let q = &config.quadrature;
    let curve = renyi_curve(&model, config.theta, config.theta + config.curve_shift, &config.s_grid, q)?;
    out.write("renyi_curve.csv", curve.to_csv_string().as_bytes())?;
    let b = compute_bounds(config, &model)?;
    out.write_json("scaling_law.json", &b.law)?;
    out.write("limit_curve.csv", b.curve.to_csv_string().as_bytes())?;
    out.write_json("bounds_report.json", &b.report)?;
    out.finish("bounds", config, started, bounds_warnings(&b))
}

fn refusal(err: Error) -> Result<String> {
    match err {
        Error::Refused { reason, .. } => Ok(reason),
        other => Err(other),
    }
}

/// The estimator as evaluated at precision `eps`.
fn indexed(spec: &EstimatorSpec, eps: f64) -> EstimatorSpec {
    if spec.is_eps_indexed() {
        spec.at_epsilon(eps)
    } else {
        *spec
    }
}

/// Exact and Monte-Carlo rows of `rates.csv` for one configuration.
pub fn rate_rows(config: &ExperimentConfig, model: &DensityModel) -> Result<Vec<RateRow>> {
    let mc = config.mc();
    let mut rows = Vec::new();
    for spec in &config.estimators {
        for &eps in &config.rate_epsilons {
            let s = indexed(spec, eps);
            let base = RateRow {
                estimator: s.to_string(),
                theta: config.theta,
                epsilon: eps,
                n: None,
                exceedances: None,
                reps: None,
                beta_hat: None,
                ci_low: None,
                ci_high: None,
                method: String::new(),
            };
            if let Err(e) = check_applicable(&s, model) {
                rows.push(RateRow {
                    method: format!("refused: {}", refusal(e)?),
                    ..base
                });
                continue;
            }
            let exact = exact_rate(&s, model, config.theta, eps, &config.quadrature)?;
            let beta = match config.mc_side {
                Side::Plus => exact.beta_plus,
                Side::Minus => exact.beta_minus,
                Side::Both => exact.beta(),
            };
            rows.push(RateRow {
                beta_hat: Some(beta),
                method: exact.method.to_string(),
                ..base.clone()
            });
            let est = mc_rate(&s, model, config.theta, eps, config.mc_side, &config.n_grid, &mc)?;
            let method = if est.lower_bound_only {
                "monte_carlo_lower_bound"
            } else {
                "monte_carlo"
            };
            for (&n, &k) in est.n_grid.iter().zip(&est.exceedances) {
                rows.push(RateRow {
                    n: Some(n),
                    exceedances: Some(k),
                    reps: Some(est.reps),
                    beta_hat: Some(est.value),
                    ci_low: Some(est.ci_low),
                    ci_high: Some(est.ci_high),
                    method: method.to_string(),
                    ..base.clone()
                });
            }
        }
    }
    Ok(rows)
}

/// One estimator in `slopes.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeEntry {
    pub estimator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refused: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SlopeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopesFile {
    pub family: String,
    pub kappa_hat: f64,
    pub bounds: BoundsReport,
    pub estimators: Vec<SlopeEntry>,
}

fn slopes(config: &ExperimentConfig, model: &DensityModel, b: &Bounds) -> Result<SlopesFile> {
    let mut entries = Vec::new();
    let finest = config.eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    for spec in &config.estimators {
        let entry = match check_applicable(&indexed(spec, finest), model) {
            Err(e) => SlopeEntry {
                estimator: spec.to_string(),
                refused: Some(refusal(e)?),
                report: None,
            },
            Ok(()) => SlopeEntry {
                estimator: spec.to_string(),
                refused: None,
                report: Some(slope_report(
                    spec,
                    model,
                    config.theta,
                    &config.eps_grid,
                    &b.law,
                    &b.report,
                    &config.quadrature,
                )?),
            },
        };
        entries.push(entry);
    }
    Ok(SlopesFile {
        family: model.label(),
        kappa_hat: b.law.kappa_hat,
        bounds: b.report.clone(),
        estimators: entries,
    })
}

/// `rates.csv` (exact and simulated rates) and `slopes.json`.
pub fn run_rates(config: &ExperimentConfig) -> Result<RunManifest> {
    let started = now();
    let model = start(config)?;
    let dir = config.resolved_output_dir();
    let mut out = ArtifactWriter::new(&dir)?;
    let rows = rate_rows(config, &model)?;
    out.write("rates.csv", rates_to_csv(&rows)?.as_bytes())?;
    let b = compute_bounds(config, &model)?;
    out.write_json("slopes.json", &slopes(config, &model, &b)?)?;
    out.finish("rates", config, started, bounds_warnings(&b))
}

/// `slopes.json` with the bounds it is compared against.
pub fn run_slopes(config: &ExperimentConfig) -> Result<RunManifest> {
    let started = now();
    let model = start(config)?;
    let dir = config.resolved_output_dir();
    let mut out = ArtifactWriter::new(&dir)?;
    let b = compute_bounds(config, &model)?;
    out.write_json("scaling_law.json", &b.law)?;
    out.write_json("bounds_report.json", &b.report)?;
    out.write_json("slopes.json", &slopes(config, &model, &b)?)?;
    out.finish("slopes", config, started, bounds_warnings(&b))
}

/// One line of the merged summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub run: String,
    pub command: String,
    pub family: String,
    pub quantity: String,
    pub estimator: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: Vec<RunManifest>,
    pub rows: Vec<SummaryRow>,
}

fn summarize(dir: &Path, m: &RunManifest) -> Result<Vec<SummaryRow>> {
    let family = build_family(&m.config.family)
        .map(|f| f.label())
        .unwrap_or_else(|_| m.config.family.name.clone());
    let row = |quantity: String, estimator: String, value: String| SummaryRow {
        run: dir.display().to_string(),
        command: m.command.clone(),
        family: family.clone(),
        quantity,
        estimator,
        value,
    };
    let mut rows = Vec::new();
    let has = |name: &str| m.files.iter().any(|f| f.path == name);
    if has("bounds_report.json") {
        let r: BoundsReport = serde_json::from_str(&std::fs::read_to_string(dir.join("bounds_report.json"))?)?;
        rows.push(row("kappa".into(), String::new(), fmt12(r.kappa)));
        rows.push(row("alpha_bar_1".into(), String::new(), fmt12(r.alpha_bar_1)));
        rows.push(row("alpha_bar_2".into(), String::new(), fmt12(r.alpha_bar_2)));
        rows.push(row("coincide".into(), String::new(), r.coincide.to_string()));
    }
    if has("slopes.json") {
        let s: SlopesFile = serde_json::from_str(&std::fs::read_to_string(dir.join("slopes.json"))?)?;
        for e in s.estimators {
            match (e.report, e.refused) {
                (Some(r), _) => {
                    rows.push(row("slope".into(), e.estimator.clone(), fmt12(r.slope)));
                    rows.push(row("attains_1".into(), e.estimator.clone(), r.comparison.attains_1.to_string()));
                    rows.push(row("attains_2".into(), e.estimator, r.comparison.attains_2.to_string()));
                }
                (None, reason) => rows.push(row("refused".into(), e.estimator, reason.unwrap_or_default())),
            }
        }
    }
    if has("rates.csv") {
        for r in parse_rates_csv(&std::fs::read_to_string(dir.join("rates.csv"))?)? {
            if r.n.is_none() {
                if let Some(b) = r.beta_hat {
                    rows.push(row(format!("exact_rate@{}", fmt12(r.epsilon)), r.estimator, fmt12(b)));
                }
            }
        }
    }
    if has("verify.json") {
        let v: super::verify::VerifyReport =
            serde_json::from_str(&std::fs::read_to_string(dir.join("verify.json"))?)?;
        rows.push(row("checks_passed".into(), String::new(), v.passed.to_string()));
        rows.push(row("checks_failed".into(), String::new(), v.failed.to_string()));
    }
    Ok(rows)
}

/// Merge the manifests of `runs` into `summary.csv` / `summary.json` under
/// `out_dir`. Any missing or modified artifact is an invariant failure.
pub fn report(runs: &[&Path], out_dir: &Path) -> Result<RunManifest> {
    let started = now();
    if runs.is_empty() {
        return Err(Error::Config("report needs at least one run directory".into()));
    }
    let mut manifests = Vec::new();
    let mut rows = Vec::new();
    for dir in runs {
        let (m, problems) = check_manifest(dir)?;
        if !problems.is_empty() {
            return Err(Error::Invariant(format!(
                "{} does not match its manifest: {}",
                dir.display(),
                problems.join("; ")
            )));
        }
        rows.extend(summarize(dir, &m)?);
        manifests.push(m);
    }
    let mut out = ArtifactWriter::new(out_dir)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.write("summary.csv", &bytes)?;
    out.write_json(
        "summary.json",
        &Summary {
            runs: manifests,
            rows,
        },
    )?;
    let config = ExperimentConfig {
        output_dir: Some(out_dir.to_path_buf()),
        ..ExperimentConfig::default()
    };
    out.finish("report", &config, started, Vec::new())
}
