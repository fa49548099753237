use ldslope::divergence::{chernoff_exponent, hoeffding_exponent, renyi_curve, renyi_divergence, RenyiCurve};
use ldslope::family::{build_family, DensityModel, FamilySpec};
use ldslope::harness::{builtin_families, concavity_violation, sandwich_violation};
use ldslope::quad::QuadratureConfig;
use proptest::prelude::*;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn models() -> Vec<DensityModel> {
    builtin_families().iter().map(|s| build_family(s).unwrap()).collect()
}

fn grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 / 20.0).collect()
}

#[test]
fn skew_symmetry() {
    for m in models() {
        for shift in [0.05, 0.3, 1.0] {
            for s in [0.1, 0.25, 0.5, 0.8] {
                let a = renyi_divergence(&m, 0.0, shift, s, &q()).unwrap();
                let b = renyi_divergence(&m, shift, 0.0, 1.0 - s, &q()).unwrap();
                assert!(a == b || (a - b).abs() <= 1e-8 * a.abs().max(1.0), "{} s={s}: {a} vs {b}", m.label());
            }
        }
    }
}

#[test]
fn chernoff_is_symmetric_under_swap() {
    for m in models() {
        for shift in [0.05, 0.3, 1.0] {
            let a = chernoff_exponent(&renyi_curve(&m, 0.0, shift, &grid(), &q()).unwrap()).value;
            let b = chernoff_exponent(&renyi_curve(&m, shift, 0.0, &grid(), &q()).unwrap()).value;
            assert!(a == b || (a - b).abs() <= 1e-8, "{}: {a} vs {b}", m.label());
        }
    }
}

#[test]
fn nondecreasing_in_shift() {
    let shifts: Vec<f64> = (1..=30).map(|i| 0.02 * i as f64).collect();
    for m in models() {
        for s in [0.2, 0.5, 0.7] {
            let v: Vec<f64> = shifts.iter().map(|&e| renyi_divergence(&m, 0.0, e, s, &q()).unwrap()).collect();
            for w in v.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "{} s={s}: {} then {}", m.label(), w[0], w[1]);
            }
        }
    }
}

#[test]
fn sandwich_and_concavity_on_every_curve() {
    for m in models() {
        for shift in [0.01, 0.1, 0.5, 2.0] {
            let c = renyi_curve(&m, 0.0, shift, &grid(), &q()).unwrap();
            let half = renyi_divergence(&m, 0.0, shift, 0.5, &q()).unwrap();
            let pts = c.closed_points();
            assert!(pts.iter().all(|p| p.1 >= 0.0));
            assert!(sandwich_violation(&pts, half) <= 1e-8, "{} shift {shift}", m.label());
            assert!(concavity_violation(&pts) <= 1e-8, "{} shift {shift}", m.label());
        }
    }
}

#[test]
fn zero_exactly_when_parameters_agree() {
    for m in models() {
        let c = renyi_curve(&m, 0.4, 0.4, &grid(), &q()).unwrap();
        assert!(c.closed_points().iter().all(|p| p.1.abs() <= 1e-12), "{}", m.label());
        assert!(renyi_divergence(&m, 0.4, 0.41, 0.5, &q()).unwrap() > 0.0);
    }
}

#[test]
fn disjoint_supports_are_infinite() {
    let u = build_family(&FamilySpec::uniform()).unwrap();
    assert_eq!(renyi_divergence(&u, 0.0, 1.5, 0.5, &q()).unwrap(), f64::INFINITY);
    let c = renyi_curve(&u, 0.0, 1.5, &grid(), &q()).unwrap();
    assert_eq!(chernoff_exponent(&c).value, f64::INFINITY);
}

#[test]
fn uniform_closed_form() {
    // Overlap 1 − δ for every order: I^s = −log(1 − δ).
    let u = build_family(&FamilySpec::uniform()).unwrap();
    for s in [0.1, 0.5, 0.9] {
        let v = renyi_divergence(&u, 0.0, 0.3, s, &q()).unwrap();
        assert!((v + 0.7f64.ln()).abs() <= 1e-12);
    }
}

#[test]
fn order_outside_unit_interval_is_a_domain_error() {
    let g = build_family(&FamilySpec::gaussian()).unwrap();
    assert!(renyi_divergence(&g, 0.0, 1.0, 1.0, &q()).is_err());
    assert!(renyi_divergence(&g, 0.0, 1.0, 0.0, &q()).is_err());
    let c = renyi_curve(&g, 0.0, 1.0, &grid(), &q()).unwrap();
    assert!(hoeffding_exponent(&c, -0.1).is_err());
}

#[test]
fn hoeffding_is_nonincreasing_in_threshold() {
    let g = build_family(&FamilySpec::gaussian()).unwrap();
    let c = renyi_curve(&g, 0.0, 1.0, &grid(), &q()).unwrap();
    let mut prev = f64::INFINITY;
    for i in 0..=10 {
        let h = hoeffding_exponent(&c, 0.05 * i as f64).unwrap();
        assert!(h <= prev + 1e-12);
        prev = h;
    }
}

#[test]
fn curve_csv_round_trip() {
    let m = build_family(&FamilySpec::beta(2.0, 3.0)).unwrap();
    let c = renyi_curve(&m, 0.0, 0.2, &grid(), &q()).unwrap();
    let back = RenyiCurve::from_csv_str(&c.to_csv_string()).unwrap();
    assert_eq!(back.s_grid, c.s_grid);
    for (a, b) in back.values.iter().zip(&c.values) {
        assert!((a - b).abs() <= 1e-11 * b.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shift_invariance(idx in 0usize..7, theta in -20.0..20.0f64, shift in 0.01..1.0f64, s in 0.05..0.95f64) {
        let m = build_family(&builtin_families()[idx]).unwrap();
        let a = renyi_divergence(&m, 0.0, shift, s, &q()).unwrap();
        let b = renyi_divergence(&m, theta, theta + shift, s, &q()).unwrap();
        prop_assert!((a - b).abs() <= 1e-7 * a.max(1e-3), "{} vs {}", a, b);
    }

    #[test]
    fn gaussian_closed_form(eps in 0.01..3.0f64, s in 0.01..0.99f64) {
        let g = build_family(&FamilySpec::gaussian()).unwrap();
        let v = renyi_divergence(&g, 0.0, eps, s, &q()).unwrap();
        let want = s * (1.0 - s) * eps * eps / 2.0;
        prop_assert!((v - want).abs() <= 1e-6 * want);
    }
}
