//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::process::ExitCode;

use ldslope::bounds::{coincidence, default_eps_grid, duality_check, fit_order, limit_curve, BoundsReport, SampledConcave};
use ldslope::divergence::{hoeffding_exponent, renyi_curve, renyi_divergence};
use ldslope::error::Result;
use ldslope::estimators::{optimal_lambda, EstimatorSpec};
use ldslope::family::{build_family, DensityModel, FamilySpec};
use ldslope::harness::{
    builtin_families, concavity_violation, duality_functions, run_rates, sandwich_violation, ExperimentConfig,
    DUALITY_S,
};
use ldslope::quad::QuadratureConfig;
use ldslope::rates::{exact_rate, mc_rate, mle_integral_rate, slope_report, test_exponents, McConfig, MleForm, Side};

type Outcome = Result<(bool, String)>;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn s_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 / 20.0).collect()
}

fn model(spec: FamilySpec) -> DensityModel {
    build_family(&spec).expect("builtin family")
}

fn bounds(m: &DensityModel) -> Result<(ldslope::bounds::ScalingLaw, BoundsReport)> {
    let law = fit_order(m, 0.0, &default_eps_grid(), &q())?;
    let curve = limit_curve(m, 0.0, &law, &s_grid(), &q())?;
    let b = coincidence(&curve, law.kappa_hat);
    Ok((law, b))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn gaussian_closed_form() -> Outcome {
    let g = model(FamilySpec::gaussian());
    let mut worst = 0.0_f64;
    for eps in [0.5, 1.0, 2.0] {
        for i in 1..=9 {
            let s = i as f64 / 10.0;
            let v = renyi_divergence(&g, 0.0, eps, s, &q())?;
            worst = worst.max(rel(v, s * (1.0 - s) * eps * eps / 2.0));
        }
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.3e}")))
}

fn scaling_orders() -> Outcome {
    let cases = [
        (FamilySpec::uniform(), 1.0, 0.02),
        (FamilySpec::exponential(), 1.0, 0.02),
        (FamilySpec::gaussian(), 2.0, 0.02),
        (FamilySpec::beta(0.5, 0.5), 0.5, 0.05),
    ];
    let mut ok = true;
    let mut msg = Vec::new();
    for (spec, want, tol) in cases {
        let m = model(spec);
        let k = fit_order(&m, 0.0, &default_eps_grid(), &q())?.kappa_hat;
        ok &= (k - want).abs() <= tol;
        msg.push(format!("{}={k:.4}", m.label()));
    }
    Ok((ok, msg.join(" ")))
}

fn bound_values() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for (spec, a1, a2) in [
        (FamilySpec::uniform(), 2.0, 2.0),
        (FamilySpec::exponential(), 2.0, 1.0),
        (FamilySpec::gaussian(), 0.5, 0.5),
    ] {
        let m = model(spec);
        let (_, b) = bounds(&m)?;
        ok &= rel(b.alpha_bar_1, a1) <= 0.02 && rel(b.alpha_bar_2, a2) <= 0.02;
        msg.push(format!("{}=({:.4},{:.4})", m.label(), b.alpha_bar_1, b.alpha_bar_2));
    }
    for spec in builtin_families() {
        let m = model(spec);
        let (_, b) = bounds(&m)?;
        if b.alpha_bar_1 < b.alpha_bar_2 {
            ok = false;
            msg.push(format!("order violated on {}", m.label()));
        }
    }
    Ok((ok, msg.join(" ")))
}

fn coincidence_flags() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for (spec, want) in [
        (FamilySpec::uniform(), true),
        (FamilySpec::gaussian(), true),
        (FamilySpec::exponential(), false),
    ] {
        let m = model(spec);
        let (_, b) = bounds(&m)?;
        ok &= b.coincide == want;
        msg.push(format!("{}={}", m.label(), b.coincide));
    }
    Ok((ok, msg.join(" ")))
}

fn exact_rates() -> Outcome {
    let u = model(FamilySpec::uniform());
    let e = model(FamilySpec::exponential());
    let min = exact_rate(&EstimatorSpec::MinShift, &u, 0.0, 0.1, &q())?.beta();
    let cc = exact_rate(&EstimatorSpec::Cc { lambda: 0.5 }, &u, 0.0, 0.1, &q())?;
    let (mle, _) = mle_integral_rate(&e, 0.25, MleForm::PlusShifted, &q())?;
    let min_e = exact_rate(&EstimatorSpec::MinShift, &e, 0.0, 0.25, &q())?.beta();
    let ok = (min - 0.105361).abs() <= 1e-6
        && (cc.beta_plus - 0.223144).abs() <= 1e-6
        && (cc.beta_minus - 0.223144).abs() <= 1e-6
        && (mle - 0.25).abs() <= 1e-4
        && (mle - min_e).abs() <= 1e-4;
    Ok((
        ok,
        format!(
            "min_shift={min:.7} cc=({:.7},{:.7}) mle_integral={mle:.7} min_shift_exp={min_e:.7}",
            cc.beta_plus, cc.beta_minus
        ),
    ))
}

fn mc_coverage() -> Outcome {
    let n_grid: Vec<usize> = (1..=8).map(|i| 5 * i).collect();
    let mc = McConfig::new(100_000, 20_261_016);
    let cells = [
        (FamilySpec::uniform(), EstimatorSpec::MinShift, 0.1, Side::Plus),
        (FamilySpec::uniform(), EstimatorSpec::MaxShift, 0.1, Side::Minus),
        (FamilySpec::uniform(), EstimatorSpec::Cc { lambda: 0.5 }, 0.1, Side::Both),
        (FamilySpec::uniform(), EstimatorSpec::MinShift, 0.2, Side::Both),
        (FamilySpec::exponential(), EstimatorSpec::MinShift, 0.1, Side::Plus),
        (FamilySpec::exponential(), EstimatorSpec::Mle, 0.1, Side::Both),
        (FamilySpec::triangular(), EstimatorSpec::MinShift, 0.2, Side::Plus),
        (FamilySpec::beta(2.0, 3.0), EstimatorSpec::MinShift, 0.2, Side::Plus),
    ];
    let mut ok = true;
    let mut misses = Vec::new();
    for (spec, est, eps, side) in cells {
        let m = model(spec);
        let exact = exact_rate(&est, &m, 0.0, eps, &q())?;
        let target = match side {
            Side::Plus => exact.beta_plus,
            Side::Minus => exact.beta_minus,
            Side::Both => exact.beta(),
        };
        let r = mc_rate(&est, &m, 0.0, eps, side, &n_grid, &mc)?;
        if !(r.ci_low <= target && target <= r.ci_high) {
            ok = false;
            misses.push(format!("{est}/{}: {target:.5} not in [{:.5},{:.5}]", m.label(), r.ci_low, r.ci_high));
        }
    }
    Ok((ok, if ok { "8/8 cells covered".into() } else { misses.join("; ") }))
}

fn slope_of(spec: EstimatorSpec, m: &DensityModel) -> Result<(f64, BoundsReport)> {
    let (law, b) = bounds(m)?;
    let r = slope_report(&spec, m, 0.0, &default_eps_grid(), &law, &b, &q())?;
    Ok((r.slope, b))
}

fn attaining_slopes() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for (spec, fam) in [
        (EstimatorSpec::ShiftedMin { epsilon: 0.1 }, FamilySpec::uniform()),
        (EstimatorSpec::ShiftedMin { epsilon: 0.1 }, FamilySpec::exponential()),
        (EstimatorSpec::Lr { epsilon: 0.1 }, FamilySpec::beta(2.0, 2.0)),
        (EstimatorSpec::Lr { epsilon: 0.1 }, FamilySpec::gaussian()),
    ] {
        let m = model(fam);
        let (slope, b) = slope_of(spec, &m)?;
        ok &= rel(slope, b.alpha_bar_1) <= 0.02;
        msg.push(format!("{spec}/{}={slope:.4} vs {:.4}", m.label(), b.alpha_bar_1));
    }
    let u = model(FamilySpec::uniform());
    let lambda = optimal_lambda(&u.edge)?;
    let (slope, b) = slope_of(EstimatorSpec::Cc { lambda }, &u)?;
    ok &= rel(slope, b.alpha_bar_2) <= 0.02;
    msg.push(format!("cc({lambda})/uniform={slope:.4} vs {:.4}", b.alpha_bar_2));
    Ok((ok, msg.join(" ")))
}

fn exponential_gap() -> Outcome {
    let e = model(FamilySpec::exponential());
    let mut ok = true;
    let mut msg = Vec::new();
    for spec in [EstimatorSpec::MinShift, EstimatorSpec::Mle] {
        let (slope, _) = slope_of(spec, &e)?;
        ok &= slope <= 1.02;
        msg.push(format!("{spec}={slope:.4}"));
    }
    let (slope, _) = slope_of(EstimatorSpec::ShiftedMin { epsilon: 0.1 }, &e)?;
    ok &= rel(slope, 2.0) <= 0.02;
    msg.push(format!("shifted_min={slope:.4}"));
    Ok((ok, msg.join(" ")))
}

fn sandwich_and_concavity() -> Outcome {
    let mut worst = 0.0_f64;
    for spec in builtin_families() {
        let m = model(spec);
        for shift in [0.05, 0.1, 1.0] {
            let c = renyi_curve(&m, 0.0, shift, &s_grid(), &q())?;
            let half = renyi_divergence(&m, 0.0, shift, 0.5, &q())?;
            let pts = c.closed_points();
            worst = worst.max(sandwich_violation(&pts, half)).max(concavity_violation(&pts));
        }
    }
    Ok((worst <= 1e-8, format!("max violation {worst:.3e}")))
}

fn chernoff_attainment() -> Outcome {
    let mc = McConfig::new(100_000, 20_261_016);
    let n_grid = [15, 25, 35, 45, 55];
    let mut ok = true;
    let mut msg = Vec::new();
    for (spec, shift) in [(FamilySpec::uniform(), 0.2), (FamilySpec::gaussian(), 1.0)] {
        let m = model(spec);
        let t = test_exponents(&m, 0.0, shift, &n_grid, &mc, &q())?;
        let r = rel(t.sum_star.value, t.target);
        ok &= r <= 0.10;
        msg.push(format!("{}: {:.4} vs {:.4} ({:.1}%)", m.label(), t.sum_star.value, t.target, 100.0 * r));
    }
    Ok((ok, msg.join(" ")))
}

fn hoeffding() -> Outcome {
    let g = model(FamilySpec::gaussian());
    let c = renyi_curve(&g, 0.0, 1.0, &s_grid(), &q())?;
    let h0 = hoeffding_exponent(&c, 0.0)?;
    let h1 = hoeffding_exponent(&c, 0.125)?;
    let e = model(FamilySpec::exponential());
    let ce = renyi_curve(&e, 0.0, 0.4, &s_grid(), &q())?;
    let he = hoeffding_exponent(&ce, 0.2)?;
    let ok = (h0 - 0.5).abs() <= 1e-3 && (h1 - 0.125).abs() <= 1e-3 && he == f64::INFINITY;
    Ok((ok, format!("gaussian r=0: {h0:.6}, r=0.125: {h1:.6}; exponential: {he}")))
}

fn duality() -> Outcome {
    let mut worst = 0.0_f64;
    for (_, f) in duality_functions() {
        let sampled = SampledConcave::from_fn(f, 4000)?;
        for s in DUALITY_S {
            worst = worst.max((duality_check(&sampled, s)? - f(s)).abs());
        }
    }
    Ok((worst <= 1e-3, format!("max |dual − f| {worst:.3e}")))
}

fn worker_invariance() -> Outcome {
    let mut outputs = Vec::new();
    for workers in [1, 4, 8] {
        let dir = tempfile::tempdir()?;
        let config = ExperimentConfig {
            reps: 10_000,
            workers,
            estimators: vec![
                EstimatorSpec::MinShift,
                EstimatorSpec::Cc { lambda: 0.5 },
                EstimatorSpec::Mle,
                EstimatorSpec::ShiftedMin { epsilon: 0.1 },
            ],
            output_dir: Some(dir.path().to_path_buf()),
            ..ExperimentConfig::default()
        };
        run_rates(&config)?;
        outputs.push(std::fs::read(dir.path().join("rates.csv"))?);
    }
    let ok = outputs.windows(2).all(|w| w[0] == w[1]);
    Ok((ok, format!("{} bytes, identical={ok}", outputs[0].len())))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("gaussian_closed_form", gaussian_closed_form),
        ("scaling_orders", scaling_orders),
        ("bound_values", bound_values),
        ("coincidence_flags", coincidence_flags),
        ("exact_rates", exact_rates),
        ("mc_coverage", mc_coverage),
        ("attaining_slopes", attaining_slopes),
        ("exponential_gap", exponential_gap),
        ("sandwich_and_concavity", sandwich_and_concavity),
        ("chernoff_attainment", chernoff_attainment),
        ("hoeffding", hoeffding),
        ("duality", duality),
        ("worker_invariance", worker_invariance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
