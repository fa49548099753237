//! Exponential rates `β±(T, θ, ε)` of estimators: exact values, Monte-Carlo
//! estimates, slopes against the scaling law, and simulated likelihood-test
//! exponents.

mod exact;
mod mc;
mod slope;
mod testing;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::ext_real;

pub use exact::{exact_rate, mle_integral_rate, mle_rate_lower_bound, MleForm};
pub use mc::{exceedance_counts, fit_rate, mc_rate, McConfig, RateEstimate};
pub use slope::{slope_report, EdgeCheck, SlopeComparison, SlopeReport, ATTAIN_TOL};
pub use testing::{test_exponents, Prefactor, TestError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    ClosedForm,
    QuadratureOpt,
    ChernoffEquiv,
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMethod::ClosedForm => "closed_form",
            RateMethod::QuadratureOpt => "quadrature_opt",
            RateMethod::ChernoffEquiv => "chernoff_equiv",
        })
    }
}

/// Which deviation is counted: `T > θ + ε`, `T < θ − ε`, or either.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
    Both,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
            Side::Both => "both",
        })
    }
}

impl FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(Side::Plus),
            "minus" => Ok(Side::Minus),
            "both" => Ok(Side::Both),
            _ => Err(Error::Parse(format!("unknown side `{s}` (plus, minus, both)"))),
        }
    }
}

/// Rates obtained by reading the edge-estimator integrals with the
/// integration limits exchanged, kept for comparison with the corrected ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwappedLimits {
    #[serde(with = "ext_real")]
    pub beta_plus: f64,
    #[serde(with = "ext_real")]
    pub beta_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    #[serde(with = "ext_real")]
    pub beta_plus: f64,
    #[serde(with = "ext_real")]
    pub beta_minus: f64,
    pub method: RateMethod,
    pub epsilon: f64,
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swapped_limits: Option<SwappedLimits>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RatePair {
    /// `β = min(β⁺, β⁻)`.
    pub fn beta(&self) -> f64 {
        self.beta_plus.min(self.beta_minus)
    }
}
