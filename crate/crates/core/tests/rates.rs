use ldslope::bounds::{coincidence, default_eps_grid, fit_order, limit_curve};
use ldslope::estimators::{check_applicable, EstimatorSpec};
use ldslope::family::{build_family, FamilySpec};
use ldslope::harness::builtin_families;
use ldslope::quad::QuadratureConfig;
use ldslope::rates::{
    exact_rate, fit_rate, mc_rate, mle_integral_rate, mle_rate_lower_bound, slope_report, test_exponents, McConfig,
    MleForm, Side,
};
use proptest::prelude::*;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

const EPS: [f64; 5] = [0.02, 0.05, 0.1, 0.25, 0.5];

#[test]
fn mle_equals_min_shift_on_monotone_models() {
    let e = build_family(&FamilySpec::exponential()).unwrap();
    for eps in EPS {
        let a = exact_rate(&EstimatorSpec::Mle, &e, 0.0, eps, &q()).unwrap();
        let b = exact_rate(&EstimatorSpec::MinShift, &e, 0.0, eps, &q()).unwrap();
        assert_eq!((a.beta_plus, a.beta_minus), (b.beta_plus, b.beta_minus));
    }
}

#[test]
fn mle_dominates_the_chernoff_lower_bound() {
    for spec in builtin_families() {
        let m = build_family(&spec).unwrap();
        if !m.flags.log_concave {
            assert!(mle_rate_lower_bound(&m, 0.0, 0.1, &q()).is_err());
            continue;
        }
        for eps in EPS {
            let r = exact_rate(&EstimatorSpec::Mle, &m, 0.0, eps, &q()).unwrap();
            let (lp, lm) = mle_rate_lower_bound(&m, 0.0, eps, &q()).unwrap();
            assert!(r.beta_plus >= lp - 1e-6, "{} ε={eps}: {} < {lp}", m.label(), r.beta_plus);
            assert!(r.beta_minus >= lm - 1e-6, "{} ε={eps}: {} < {lm}", m.label(), r.beta_minus);
        }
    }
}

#[test]
fn shifted_and_unshifted_integral_forms_agree() {
    for spec in builtin_families() {
        let m = build_family(&spec).unwrap();
        if !m.flags.log_concave {
            continue;
        }
        for eps in EPS {
            let pairs = [
                (MleForm::PlusShifted, MleForm::PlusUnshifted),
                (MleForm::MinusShifted, MleForm::MinusUnshifted),
            ];
            for (a, b) in pairs {
                let (x, _) = mle_integral_rate(&m, eps, a, &q()).unwrap();
                let (y, _) = mle_integral_rate(&m, eps, b, &q()).unwrap();
                assert!(x == y || (x - y).abs() <= 1e-8 * x.abs(), "{} ε={eps}: {x} vs {y}", m.label());
            }
        }
    }
}

#[test]
fn rates_are_nonnegative_and_shift_invariant() {
    for spec in builtin_families() {
        let m = build_family(&spec).unwrap();
        for est in [EstimatorSpec::MinShift, EstimatorSpec::MaxShift, EstimatorSpec::Cc { lambda: 0.3 }, EstimatorSpec::Mle] {
            if check_applicable(&est, &m).is_err() {
                continue;
            }
            let a = exact_rate(&est, &m, 0.0, 0.1, &q()).unwrap();
            let b = exact_rate(&est, &m, 5.0, 0.1, &q()).unwrap();
            assert!(a.beta_plus >= 0.0 && a.beta_minus >= 0.0);
            assert_eq!((a.beta_plus, a.beta_minus), (b.beta_plus, b.beta_minus));
        }
    }
}

#[test]
fn slopes_never_exceed_the_upper_bound() {
    for spec in builtin_families() {
        let m = build_family(&spec).unwrap();
        let law = fit_order(&m, 0.0, &default_eps_grid(), &q()).unwrap();
        let curve = limit_curve(&m, 0.0, &law, &(1..20).map(|i| i as f64 / 20.0).collect::<Vec<_>>(), &q()).unwrap();
        let b = coincidence(&curve, law.kappa_hat);
        for est in [
            EstimatorSpec::MinShift,
            EstimatorSpec::MaxShift,
            EstimatorSpec::Cc { lambda: 0.5 },
            EstimatorSpec::Mle,
            EstimatorSpec::Lr { epsilon: 0.1 },
            EstimatorSpec::ShiftedMin { epsilon: 0.1 },
        ] {
            if check_applicable(&est.at_epsilon(1e-5), &m).is_err() {
                continue;
            }
            let r = slope_report(&est, &m, 0.0, &default_eps_grid(), &law, &b, &q()).unwrap();
            assert!(r.slope <= b.alpha_bar_1 * 1.02, "{est} on {}: {} > {}", m.label(), r.slope, b.alpha_bar_1);
            assert!(r.comparison.below_alpha_bar_1);
        }
    }
}

#[test]
fn mc_estimates_bracket_their_value() {
    let u = build_family(&FamilySpec::uniform()).unwrap();
    let mc = McConfig::new(10_000, 3);
    let n_grid = [5, 10, 20, 40];
    for side in [Side::Plus, Side::Minus, Side::Both] {
        let r = mc_rate(&EstimatorSpec::Cc { lambda: 0.5 }, &u, 0.0, 0.1, side, &n_grid, &mc).unwrap();
        assert!(r.ci_low <= r.value && r.value <= r.ci_high);
        assert_eq!(r.exceedances.len(), n_grid.len());
    }
}

#[test]
fn zero_exceedance_cells_only_bound_from_below() {
    // β⁻ of min_shift is infinite: no sample ever falls below θ − ε.
    let u = build_family(&FamilySpec::uniform()).unwrap();
    let mc = McConfig::new(10_000, 3);
    let r = mc_rate(&EstimatorSpec::MinShift, &u, 0.0, 0.1, Side::Minus, &[5, 10, 20, 40], &mc).unwrap();
    assert!(r.lower_bound_only);
    assert_eq!(r.ci_high, f64::INFINITY);
    assert!(r.exceedances.iter().all(|&k| k == 0));
}

#[test]
fn mc_rejects_bad_grids_and_small_budgets() {
    let u = build_family(&FamilySpec::uniform()).unwrap();
    let spec = EstimatorSpec::MinShift;
    assert!(mc_rate(&spec, &u, 0.0, 0.1, Side::Plus, &[5, 10], &McConfig::new(10_000, 1)).is_err());
    assert!(mc_rate(&spec, &u, 0.0, 0.1, Side::Plus, &[5, 10, 10, 20], &McConfig::new(10_000, 1)).is_err());
    assert!(mc_rate(&spec, &u, 0.0, 0.1, Side::Plus, &[5, 10, 15, 20], &McConfig::new(10, 1)).is_err());
}

#[test]
fn identical_hypotheses_have_zero_exponent() {
    let u = build_family(&FamilySpec::uniform()).unwrap();
    let t = test_exponents(&u, 0.0, 0.0, &[5, 10, 15, 20], &McConfig::new(10_000, 9), &q()).unwrap();
    assert_eq!(t.target, 0.0);
    assert!(t.sum_star.value.abs() <= 0.01, "{}", t.sum_star.value);
}

#[test]
fn test_error_probabilities_are_probabilities() {
    let g = build_family(&FamilySpec::gaussian()).unwrap();
    let t = test_exponents(&g, 0.0, 0.8, &[5, 10, 15, 20], &McConfig::new(10_000, 9), &q()).unwrap();
    assert!(t.e1_hat.iter().chain(&t.e2_hat).all(|p| (0.0..=1.0).contains(p)));
    assert!(t.e1_star.value >= 0.0 && t.e2_star.value >= 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fit_recovers_geometric_decay(rate in 0.02..0.4f64, c in 0.2..1.0f64) {
        // Noise-free counts from p_n = c·e^{−βn}.
        let reps = 1_000_000u64;
        let n_grid = [5usize, 10, 15, 20];
        let counts: Vec<u64> = n_grid
            .iter()
            .map(|&n| (reps as f64 * c * (-rate * n as f64).exp()).round() as u64)
            .collect();
        prop_assume!(counts.iter().all(|&k| k > 100));
        let r = fit_rate(&n_grid, &counts, reps, 0.0, 0).unwrap();
        prop_assert!((r.value - rate).abs() <= 2e-3, "{} vs {}", r.value, rate);
        prop_assert!(r.ci_low <= r.value && r.value <= r.ci_high);
    }

    #[test]
    fn uniform_min_shift_closed_form(eps in 0.001..0.99f64) {
        let u = build_family(&FamilySpec::uniform()).unwrap();
        let r = exact_rate(&EstimatorSpec::MinShift, &u, 0.0, eps, &q()).unwrap();
        prop_assert!((r.beta_plus + (1.0 - eps).ln()).abs() <= 1e-12);
        prop_assert_eq!(r.beta_minus, f64::INFINITY);
    }
}
