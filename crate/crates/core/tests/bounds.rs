use ldslope::bounds::{
    alpha_bar_2, coincidence, default_eps_grid, duality_check, fit_order, fit_order_at, limit_curve, LimitCurve,
    SampledConcave,
};
use ldslope::family::{build_family, FamilySpec};
use ldslope::harness::{builtin_families, concavity_violation};
use ldslope::quad::QuadratureConfig;
use proptest::prelude::*;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn s_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 / 20.0).collect()
}

#[test]
fn order_of_the_bounds_on_every_family() {
    for spec in builtin_families() {
        let m = build_family(&spec).unwrap();
        for theta in [0.0, 3.7] {
            let law = fit_order(&m, theta, &default_eps_grid(), &q()).unwrap();
            let curve = limit_curve(&m, theta, &law, &s_grid(), &q()).unwrap();
            let b = coincidence(&curve, law.kappa_hat);
            assert!(b.alpha_bar_1 >= b.alpha_bar_2 - 1e-9, "{}: {b:?}", m.label());
            assert!(b.diagnostics.order_holds);
            assert!(curve.values.iter().all(|v| *v >= 0.0));
        }
    }
}

#[test]
fn limit_curves_are_concave_for_power_law_families() {
    for spec in [FamilySpec::uniform(), FamilySpec::exponential(), FamilySpec::gaussian()] {
        let m = build_family(&spec).unwrap();
        let law = fit_order(&m, 0.0, &default_eps_grid(), &q()).unwrap();
        let curve = limit_curve(&m, 0.0, &law, &s_grid(), &q()).unwrap();
        let pts = curve.closed_points();
        assert!(concavity_violation(&pts) <= 1e-6, "{}", m.label());
        assert!(curve.extrapolation.iter().all(|e| e.stable), "{}", m.label());
    }
}

#[test]
fn branch_continuity_at_kappa_one() {
    let m = build_family(&FamilySpec::exponential()).unwrap();
    let law = fit_order(&m, 0.0, &default_eps_grid(), &q()).unwrap();
    let curve = limit_curve(&m, 0.0, &law, &s_grid(), &q()).unwrap();
    let (at_one, _) = alpha_bar_2(&curve, 1.0);
    for k in [1.0 - 1e-3, 1.0 + 1e-3] {
        let (v, _) = alpha_bar_2(&curve, k);
        assert!(((v - at_one) / at_one).abs() <= 0.01, "κ = {k}: {v} vs {at_one}");
    }
}

#[test]
fn regular_collapse_for_the_gaussian() {
    // Unit Fisher information: both bounds equal J/2.
    let m = build_family(&FamilySpec::gaussian()).unwrap();
    let law = fit_order(&m, 0.0, &default_eps_grid(), &q()).unwrap();
    let curve = limit_curve(&m, 0.0, &law, &s_grid(), &q()).unwrap();
    let b = coincidence(&curve, law.kappa_hat);
    assert!((b.alpha_bar_1 - 0.5).abs() <= 0.005 && (b.alpha_bar_2 - 0.5).abs() <= 0.005, "{b:?}");
    assert!(b.coincide);
}

#[test]
fn fitted_order_does_not_depend_on_s() {
    for spec in builtin_families() {
        let m = build_family(&spec).unwrap();
        let half = fit_order(&m, 0.0, &default_eps_grid(), &q()).unwrap().kappa_hat;
        let quarter = fit_order_at(&m, 0.0, &default_eps_grid(), 0.25, &q()).unwrap().kappa_hat;
        assert!(((quarter - half) / half).abs() <= 0.02, "{}: {half} vs {quarter}", m.label());
    }
}

#[test]
fn scaling_law_ratios_match_the_power() {
    for spec in [FamilySpec::uniform(), FamilySpec::exponential(), FamilySpec::gaussian()] {
        let m = build_family(&spec).unwrap();
        let law = fit_order(&m, 0.0, &default_eps_grid(), &q()).unwrap();
        assert!(law.kappa_hat > 0.0 && !law.degenerate);
        assert!(law.ratio_deviation <= 0.01, "{}: {}", m.label(), law.ratio_deviation);
        assert_eq!(law.residuals.len(), law.eps_grid.len());
    }
}

#[test]
fn duality_on_the_reference_functions() {
    let fs: [fn(f64) -> f64; 3] = [|t| t * (1.0 - t), |t: f64| t.min(1.0 - t), |_| 0.4];
    for f in fs {
        let sampled = SampledConcave::from_fn(f, 2000).unwrap();
        for s in [0.05, 0.2, 0.5, 0.75, 0.95] {
            let d = duality_check(&sampled, s).unwrap();
            assert!((d - f(s)).abs() <= 1e-3, "s = {s}: {d} vs {}", f(s));
        }
    }
}

#[test]
fn limit_curve_csv_round_trip() {
    let m = build_family(&FamilySpec::uniform()).unwrap();
    let law = fit_order(&m, 0.0, &default_eps_grid(), &q()).unwrap();
    let curve = limit_curve(&m, 0.0, &law, &s_grid(), &q()).unwrap();
    let back = LimitCurve::from_csv_str(&curve.to_csv_string()).unwrap();
    assert_eq!(back.s_grid, curve.s_grid);
    for (a, b) in back.values.iter().zip(&curve.values) {
        assert!((a - b).abs() <= 1e-11 * b.abs());
    }
}

#[test]
fn sampled_concave_rejects_bad_input() {
    assert!(SampledConcave::new(vec![0.5], vec![1.0]).is_err());
    assert!(SampledConcave::new(vec![0.2, 0.8], vec![1.0, -1.0]).is_err());
    assert!(SampledConcave::new(vec![0.8, 0.2], vec![1.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn duality_recovers_random_concave_functions(
        a in 0.0..3.0f64,
        b in 0.0..3.0f64,
        c in 0.0..1.0f64,
        p in 0.5..1.0f64,
        s in 0.05..0.95f64,
    ) {
        let f = move |t: f64| a * t * (1.0 - t) + b * t.min(1.0 - t) + c + 0.3 * t.powf(p);
        let sampled = SampledConcave::from_fn(f, 2000).unwrap();
        let d = duality_check(&sampled, s).unwrap();
        prop_assert!((d - f(s)).abs() <= 1e-3, "{} vs {}", d, f(s));
    }
}
