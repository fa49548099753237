use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::default_eps_grid;
use crate::error::{Error, Result};
use crate::estimators::EstimatorSpec;
use crate::family::{build_family, FamilySpec};
use crate::quad::QuadratureConfig;
use crate::rates::{McConfig, Side};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "LDSLOPE_OUTPUT_DIR";
/// Output directory when neither the config, a flag nor the environment set one.
pub const DEFAULT_OUTPUT_DIR: &str = "ldslope-out";

/// Names accepted in `tolerances`, with their defaults.
pub const TOLERANCE_DEFAULTS: &[(&str, f64)] = &[
    ("sandwich", 1e-8),
    ("concavity", 1e-8),
    ("order", 1e-9),
    ("mle_forms", 1e-8),
    ("mle_lower_bound", 1e-6),
    ("duality", 1e-3),
    ("exact_vs_mc", 1.0),
    ("chernoff_attainment", 0.1),
    ("slope_bound", 0.02),
    ("lr_attains", 0.02),
];

/// One experiment. Every field has a default, so `{}` is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub theta: f64,
    /// Geometric grid for the scaling-law fit and slope extrapolation.
    pub eps_grid: Vec<f64>,
    /// Orders `s` in `(0, 1)`, strictly increasing.
    pub s_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub reps: u64,
    pub master_seed: u64,
    pub estimators: Vec<EstimatorSpec>,
    pub output_dir: Option<PathBuf>,
    /// Per-check tolerance overrides; keys from [`TOLERANCE_DEFAULTS`].
    pub tolerances: BTreeMap<String, f64>,
    /// Precisions at which `rates.csv` tabulates exact and simulated rates.
    pub rate_epsilons: Vec<f64>,
    /// Shift of the pair whose Rényi curve `renyi_curve.csv` records.
    pub curve_shift: f64,
    pub mc_side: Side,
    /// Worker threads; 0 uses every core. Never changes results.
    pub workers: usize,
    pub chunk_size: u64,
    pub quadrature: QuadratureConfig,
    /// Extra `(θ₁, θ₂)` pairs for the likelihood-test check on `family`.
    pub test_pairs: Vec<[f64; 2]>,
    /// Sample sizes for the likelihood-test simulation. Larger than `n_grid`
    /// because the Gaussian error probabilities carry a `1 − O(1/n)` factor.
    pub test_n_grid: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: FamilySpec::uniform(),
            theta: 0.0,
            eps_grid: default_eps_grid(),
            s_grid: (1..20).map(|i| i as f64 / 20.0).collect(),
            n_grid: (1..=8).map(|i| 5 * i).collect(),
            reps: 100_000,
            master_seed: 20_261_016,
            estimators: vec![
                EstimatorSpec::MinShift,
                EstimatorSpec::MaxShift,
                EstimatorSpec::Cc { lambda: 0.5 },
                EstimatorSpec::Mle,
                EstimatorSpec::Lr { epsilon: 0.1 },
                EstimatorSpec::ShiftedMin { epsilon: 0.1 },
            ],
            output_dir: None,
            tolerances: BTreeMap::new(),
            rate_epsilons: vec![0.1],
            curve_shift: 0.1,
            mc_side: Side::Both,
            workers: 0,
            chunk_size: 4096,
            quadrature: QuadratureConfig::default(),
            test_pairs: Vec::new(),
            test_n_grid: vec![15, 25, 35, 45, 55],
        }
    }
}

/// Command-line values; each `Some` replaces the config field.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub family: Option<FamilySpec>,
    pub theta: Option<f64>,
    pub eps_grid: Option<Vec<f64>>,
    pub s_grid: Option<Vec<f64>>,
    pub n_grid: Option<Vec<usize>>,
    pub reps: Option<u64>,
    pub master_seed: Option<u64>,
    pub estimators: Option<Vec<EstimatorSpec>>,
    pub output_dir: Option<PathBuf>,
    pub tolerances: Vec<(String, f64)>,
    pub rate_epsilons: Option<Vec<f64>>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(self, c: &mut ExperimentConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { c.$f = v; })*};
        }
        set!(family, theta, eps_grid, s_grid, n_grid, reps, master_seed, estimators, rate_epsilons, workers);
        if self.output_dir.is_some() {
            c.output_dir = self.output_dir;
        }
        c.tolerances.extend(self.tolerances);
    }
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parse and validate a JSON document. Errors name the offending line.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        c.validate().map_err(|(key, msg)| match line_of(text, key) {
            Some(l) => Error::Config(format!("line {l}: {key}: {msg}")),
            None => Error::Config(format!("{key}: {msg}")),
        })?;
        Ok(c)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Defaults, then the file (if any), then the flags.
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<Self> {
        let mut c = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::from_json_str(&text)?
            }
            None => Self::default(),
        };
        overrides.apply(&mut c);
        c.validate().map_err(|(key, msg)| Error::Config(format!("{key}: {msg}")))?;
        Ok(c)
    }

    /// Field-level validation; returns the offending field name on failure.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let e = |k: &'static str, m: String| Err((k, m));
        if let Err(err) = build_family(&self.family) {
            return e("family", err.to_string());
        }
        if !self.theta.is_finite() {
            return e("theta", "must be finite".into());
        }
        if self.eps_grid.is_empty() {
            return e("eps_grid", "must not be empty".into());
        }
        if self.eps_grid.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return e("eps_grid", "values must be positive and finite".into());
        }
        if self.s_grid.is_empty() {
            return e("s_grid", "must not be empty".into());
        }
        if self.s_grid.iter().any(|s| !(*s > 0.0 && *s < 1.0)) || self.s_grid.windows(2).any(|w| w[1] <= w[0]) {
            return e("s_grid", "values must be strictly increasing inside (0, 1)".into());
        }
        if self.n_grid.is_empty() {
            return e("n_grid", "must not be empty".into());
        }
        if self.n_grid.contains(&0) {
            return e("n_grid", "sample sizes must be positive".into());
        }
        if self.test_n_grid.len() < 4 || self.test_n_grid.contains(&0) || self.test_n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return e("test_n_grid", "needs at least 4 strictly increasing positive sizes".into());
        }
        if self.reps < 1 {
            return e("reps", "must be at least 1".into());
        }
        for spec in &self.estimators {
            if let Err(err) = spec.validate() {
                return e("estimators", err.to_string());
            }
        }
        for (k, v) in &self.tolerances {
            if !TOLERANCE_DEFAULTS.iter().any(|(name, _)| name == k) {
                return e("tolerances", format!("unknown check `{k}`"));
            }
            if !(*v >= 0.0 && v.is_finite()) {
                return e("tolerances", format!("`{k}` must be a finite nonnegative number"));
            }
        }
        if self.rate_epsilons.is_empty() || self.rate_epsilons.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return e("rate_epsilons", "must be nonempty, positive and finite".into());
        }
        if !(self.curve_shift > 0.0 && self.curve_shift.is_finite()) {
            return e("curve_shift", "must be positive and finite".into());
        }
        if self.chunk_size == 0 {
            return e("chunk_size", "must be positive".into());
        }
        if let Err(err) = self.quadrature.validate() {
            return e("quadrature", err.to_string());
        }
        if self.test_pairs.iter().flatten().any(|v| !v.is_finite()) {
            return e("test_pairs", "values must be finite".into());
        }
        Ok(())
    }

    /// Tolerance for check `name`: the override, else the default.
    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            TOLERANCE_DEFAULTS
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .expect("known check name")
        })
    }

    /// Output directory: config or flag, else `$LDSLOPE_OUTPUT_DIR`, else
    /// [`DEFAULT_OUTPUT_DIR`].
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn mc(&self) -> McConfig {
        McConfig {
            reps: self.reps,
            seed: self.master_seed,
            chunk_size: self.chunk_size,
            workers: self.workers,
        }
    }

    /// SHA-256 of the compact JSON form, excluding `output_dir` and
    /// `workers`, which never change results.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        c.workers = 0;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(ExperimentConfig::from_json_str("{}").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::default();
        c.eps_grid = vec![0.3, 1.0 / 3.0];
        c.tolerances.insert("sandwich".into(), 1e-7);
        c.output_dir = Some("out".into());
        let back = ExperimentConfig::from_json_str(&c.to_json_pretty()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_name_the_line() {
        let text = "{\n  \"theta\": 0,\n  \"eps_grid\": []\n}";
        let err = ExperimentConfig::from_json_str(text).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("eps_grid"), "{err}");
        let err = ExperimentConfig::from_json_str("{\n  \"thta\": 0\n}").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let mut c = ExperimentConfig::from_json_str(r#"{"reps": 20000, "theta": 1.5}"#).unwrap();
        Overrides {
            reps: Some(30000),
            ..Overrides::default()
        }
        .apply(&mut c);
        assert_eq!(c.reps, 30000);
        assert_eq!(c.theta, 1.5);
    }

    #[test]
    fn hash_ignores_workers() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.workers = 8;
        assert_eq!(a.hash(), b.hash());
        b.master_seed += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
