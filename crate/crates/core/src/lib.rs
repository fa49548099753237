//! Large-deviation performance of estimators in non-regular location-shift
//! families.
//!
//! The crate is organised bottom-up:
//!
//! * [`family`]: location-shift densities `f(x - θ)` with parameter-dependent
//!   support, their evaluators and a deterministic inverse-cdf sampler.
//! * [`divergence`]: relative Rényi entropies `I^s(p‖q)`, their `s`-curves and
//!   the Chernoff / Hoeffding testing exponents.
//! * [`bounds`]: the scaling law `g(ε) ~ ε^κ`, the normalised limit curve and
//!   the two upper bounds `ᾱ₁`, `ᾱ₂` together with their coincidence test.
//! * [`estimators`]: the location estimators (edge estimators, convex
//!   combinations, maximum likelihood, likelihood-ratio and shifted minimum).
//! * [`rates`]: exact and Monte-Carlo exponential rates, slopes against `g`,
//!   and simulated likelihood-test exponents.
//! * [`harness`]: experiment configuration, file formats, manifests and the
//!   invariant verification suite driven by the `ldslope` CLI.

pub mod bounds;
pub mod divergence;
pub mod error;
pub mod estimators;
pub mod extrapolate;
pub mod family;
pub mod harness;
pub mod num;
pub mod optimize;
pub mod quad;
pub mod rates;
pub mod rng;
pub mod stats;

pub use bounds::{
    alpha_bar_1, alpha_bar_2, coincidence, duality_check, fit_order, limit_curve, BoundsReport,
    LimitCurve, SampledConcave, ScalingLaw,
};
pub use divergence::{
    chernoff_exponent, hoeffding_exponent, renyi_curve, renyi_divergence, Chernoff, RenyiCurve,
};
pub use error::{Error, Result};
pub use estimators::{optimal_lambda, point_estimate, Estimate, EstimatorSpec};
pub use family::{
    build_family, evaluate, sample, DensityModel, EdgeProfile, EvalKind, FamilySpec, SampleBatch,
    StructuralFlags, SupportSpec,
};
pub use quad::QuadratureConfig;
pub use rates::{
    exact_rate, mc_rate, mle_rate_lower_bound, slope_report, test_exponents, McConfig, RateEstimate,
    RateMethod, RatePair, Side, SlopeReport, TestError,
};
