use ldslope::family::{build_family, sample, DensityModel, FamilySpec};
use ldslope::harness::builtin_families;
use ldslope::quad::{integrate_with, Layout, QuadratureConfig};
use ldslope::stats::{ks_critical_1pct, ks_statistic};
use proptest::prelude::*;

fn models() -> Vec<DensityModel> {
    builtin_families().iter().map(|s| build_family(s).unwrap()).collect()
}

#[test]
fn densities_integrate_to_one() {
    let q = QuadratureConfig::default();
    for m in models() {
        let (lo, hi) = m.effective_range();
        let layout = Layout {
            breakpoints: m.kinks(),
            left_power: if m.support.lower.is_finite() { q.power_for_edge(m.edge.kappa1) } else { 1.0 },
            right_power: if m.support.upper.is_finite() { q.power_for_edge(m.edge.kappa2) } else { 1.0 },
        };
        let total = integrate_with(|y| m.pdf(y), lo, hi, &layout, &q).unwrap().value;
        assert!((total - 1.0).abs() <= 1e-8, "{}: {total}", m.label());
    }
}

#[test]
fn cdf_is_monotone_from_zero_to_one() {
    for m in models() {
        let (lo, hi) = m.effective_range();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let y = lo + (hi - lo) * i as f64 / 1000.0;
            let p = m.cdf(y);
            assert!((0.0..=1.0).contains(&p) && p >= prev, "{} at {y}", m.label());
            assert!(m.pdf(y) >= 0.0);
            prev = p;
        }
        assert!(m.cdf(lo) <= 1e-12 && m.cdf(hi) >= 1.0 - 1e-12, "{}", m.label());
    }
}

#[test]
fn quantile_round_trip_on_grid() {
    for m in models() {
        for i in 1..=999 {
            let u = i as f64 / 1000.0;
            let x = m.quantile(u).unwrap();
            assert!((m.cdf(x) - u).abs() <= 1e-10, "{} at u = {u}", m.label());
        }
    }
}

#[test]
fn edge_law_holds_at_small_offsets() {
    for m in models() {
        let e = m.edge;
        if m.support.lower.is_finite() && e.a1 > 0.0 {
            let h = 1e-4;
            let ratio = m.pdf(m.support.lower + h) / (e.a1 * h.powf(e.kappa1 - 1.0));
            assert!((ratio - 1.0).abs() <= 0.05, "{} left edge ratio {ratio}", m.label());
        }
        if m.support.upper.is_finite() && e.a2 > 0.0 {
            let h = 1e-4;
            let ratio = m.pdf(m.support.upper - h) / (e.a2 * h.powf(e.kappa2 - 1.0));
            assert!((ratio - 1.0).abs() <= 0.05, "{} right edge ratio {ratio}", m.label());
        }
    }
}

#[test]
fn score_matches_finite_difference() {
    for m in models() {
        let kinks = m.kinks();
        for i in 1..20 {
            let y = m.quantile(i as f64 / 20.0).unwrap();
            let d = [y - m.support.lower, m.support.upper - y]
                .into_iter()
                .chain(kinks.iter().map(|k| (y - k).abs()))
                .fold(1.0_f64, f64::min);
            if d < 1e-3 {
                continue;
            }
            // Five-point stencil of θ ↦ log f(y − θ) at θ = 0.
            let h = 1e-3 * d;
            let l = |t: f64| m.log_pdf(y - t);
            let fd = (l(-2.0 * h) - 8.0 * l(-h) + 8.0 * l(h) - l(2.0 * h)) / (12.0 * h);
            assert!((m.score(y) - fd).abs() <= 1e-6, "{} at {y}: {} vs {fd}", m.label(), m.score(y));
        }
    }
}

#[test]
fn samples_pass_kolmogorov_smirnov() {
    for m in models() {
        let theta = 0.7;
        let s = sample(&m, theta, 100_000, 11).unwrap();
        let d = ks_statistic(&s.values, |x| m.cdf(x - theta));
        assert!(d < ks_critical_1pct(s.values.len()), "{}: D = {d}", m.label());
    }
}

#[test]
fn unknown_family_and_bad_parameters_are_rejected() {
    assert!("cauchy".parse::<FamilySpec>().map(|s| build_family(&s)).is_err());
    assert!(build_family(&"beta(-1,2)".parse().unwrap()).is_err());
    assert!(build_family(&"uniform(1,0)".parse().unwrap()).is_err());
    assert!("beta(1,2,3)".parse::<FamilySpec>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samples_lie_in_shifted_support(idx in 0usize..7, theta in -50.0..50.0f64, seed: u64, n in 1usize..200) {
        let m = build_family(&builtin_families()[idx]).unwrap();
        let s = sample(&m, theta, n, seed).unwrap();
        prop_assert!(s.values.iter().all(|&x| m.support.contains(x, theta)));
        prop_assert_eq!(s, sample(&m, theta, n, seed).unwrap());
    }

    #[test]
    fn quantile_round_trip(idx in 0usize..7, u in 0.001..0.999f64) {
        let m = build_family(&builtin_families()[idx]).unwrap();
        let x = m.quantile(u).unwrap();
        prop_assert!((m.cdf(x) - u).abs() <= 1e-10);
    }

    #[test]
    fn family_label_round_trip(a in 0.1..20.0f64, b in 0.1..20.0f64) {
        let label = build_family(&FamilySpec::beta(a, b)).unwrap().label();
        let back: FamilySpec = label.parse().unwrap();
        prop_assert_eq!(build_family(&back).unwrap().label(), label);
    }
}
