use lplevel::fields::{lp_norm_best, Catalog, TestFunction};
use lplevel::measure::*;
use lplevel::norms::{check_theorem11_bounds, unit_ball_volume, weak_lp_quasinorm};
use lplevel::Error;
use proptest::prelude::*;

fn cat(name: &str, dim: usize) -> TestFunction {
    Catalog::standard().get(name, dim).unwrap()
}

fn s0(p: f64) -> QuotientParams {
    QuotientParams::new(0.0, p).unwrap()
}

/// Exact λ·m(λ) for 1_{[0,1]}, N = p = 1, s = 0.
fn indicator_oracle(lambda: f64) -> f64 {
    if lambda <= 1.0 {
        4.0 - 2.0 * lambda
    } else {
        2.0 / lambda
    }
}

/// Brute-force count of {|u(x) − u(y)| ≥ λ|x − y|} on a fine planar grid,
/// independent of the estimator.
fn indicator_grid_count(lambda: f64) -> f64 {
    let reach = 1.0 / lambda;
    let (lo, hi) = (-reach - 0.5, 1.0 + reach + 0.5);
    let n = 6000;
    let h = (hi - lo) / n as f64;
    let ind = |x: f64| -> f64 { if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 } };
    let mut count = 0usize;
    for i in 0..n {
        let x = lo + (i as f64 + 0.5) * h;
        for k in 0..n {
            let y = lo + (k as f64 + 0.5) * h;
            if (ind(x) - ind(y)).abs() >= lambda * (x - y).abs() && x != y {
                count += 1;
            }
        }
    }
    count as f64 * h * h
}

#[test]
fn indicator_oracle_matches_brute_force() {
    for lambda in [0.5, 2.0] {
        let brute = indicator_grid_count(lambda);
        assert!((brute - indicator_oracle(lambda) / lambda).abs() < 0.01 * brute, "{lambda}: {brute}");
    }
}

#[test]
fn indicator_profile_all_methods() {
    let u = cat("cube_indicator", 1);
    for method in [Method::RadialSections, Method::TensorQuadrature, Method::StratifiedMc] {
        let cfg = EstimatorConfig { method, samples_or_nodes: 4096, ..Default::default() };
        for lambda in [0.5, 0.25, 0.1, 2.0] {
            let m = level_set_measure(&u, &s0(1.0), lambda, &cfg).unwrap();
            let want = indicator_oracle(lambda) / lambda;
            let slack = 0.01 * want + m.error();
            assert!((m.measure - want).abs() <= slack, "{method:?} λ={lambda}: {m:?} vs {want}");
        }
    }
}

#[test]
fn two_dimensional_indicator_methods_agree() {
    let u = cat("cube_indicator", 2);
    let q = s0(1.0);
    let radial = level_set_measure(&u, &q, 0.5, &EstimatorConfig { samples_or_nodes: 1024, ..Default::default() }).unwrap();
    let tensor = level_set_measure(
        &u,
        &q,
        0.5,
        &EstimatorConfig { method: Method::TensorQuadrature, samples_or_nodes: 4096, ..Default::default() },
    )
    .unwrap();
    let mc = level_set_measure(
        &u,
        &q,
        0.5,
        &EstimatorConfig { method: Method::StratifiedMc, samples_or_nodes: 2048, ..Default::default() },
    )
    .unwrap();
    for other in [tensor, mc] {
        let slack = 0.02 * radial.measure + radial.error() + other.error();
        assert!((other.measure - radial.measure).abs() <= slack, "{other:?} vs {radial:?}");
    }
}

#[test]
fn sandwich_at_finite_lambda() {
    // half-space measure within κ_N‖u‖_p^p/λ^p ± κ_N²R^{2N}, R = 1
    let u = cat("cube_indicator", 1);
    let kappa = unit_ball_volume(1);
    for lambda in [0.5, 0.25] {
        let half = level_set_measure(&u, &s0(1.0), lambda, &EstimatorConfig::default()).unwrap().measure / 2.0;
        let centre = kappa / lambda;
        assert!((half - centre).abs() <= kappa * kappa, "{lambda}: {half}");
    }
}

#[test]
fn dilation_covariance() {
    // u(·/r) at level λ·r^{−N/p} has r^{2N} times the measure of u at λ
    let cfg = EstimatorConfig::default();
    for dim in [1, 2] {
        let u = cat("cube_indicator", dim);
        let base = level_set_measure(&u, &s0(1.0), 0.5, &cfg).unwrap().measure;
        for r in [2.0f64, 4.0] {
            let lambda = 0.5 * r.powf(-(dim as f64));
            let d = level_set_measure(&u.dilated(r), &s0(1.0), lambda, &cfg).unwrap().measure;
            let want = base * r.powi(2 * dim as i32);
            assert!((d - want).abs() <= 0.01 * want, "N={dim} r={r}: {d} vs {want}");
        }
    }
}

#[test]
fn symmetric_and_full_estimates_agree() {
    for (name, dim) in [("gaussian", 1), ("cube_indicator", 2), ("bump", 2)] {
        let u = cat(name, dim);
        let half = EstimatorConfig::default();
        let full = EstimatorConfig { symmetric: false, ..Default::default() };
        let a = level_set_measure(&u, &s0(2.0), 0.3, &half).unwrap();
        let b = level_set_measure(&u, &s0(2.0), 0.3, &full).unwrap();
        assert!((a.measure - b.measure).abs() <= a.error() + b.error() + 1e-9 * a.measure, "{name}: {a:?} {b:?}");
    }
}

#[test]
fn deterministic_under_any_thread_count() {
    let u = cat("gaussian", 2);
    for method in [Method::RadialSections, Method::StratifiedMc, Method::TensorQuadrature] {
        let cfg = EstimatorConfig { method, rng_seed: 7, ..Default::default() };
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| level_set_measure(&u, &s0(1.5), 0.2, &cfg).unwrap())
        };
        let one = run(1);
        for t in [2, 5] {
            let other = run(t);
            assert_eq!(one.measure.to_bits(), other.measure.to_bits(), "{method:?}");
            assert_eq!(one.std_error.to_bits(), other.std_error.to_bits());
            assert_eq!(one.tail_bound.to_bits(), other.tail_bound.to_bits());
        }
    }
}

#[test]
fn monte_carlo_seed_changes_within_standard_errors() {
    let u = cat("bump", 1);
    let run = |seed| {
        level_set_measure(
            &u,
            &s0(2.0),
            0.4,
            &EstimatorConfig { method: Method::StratifiedMc, rng_seed: seed, ..Default::default() },
        )
        .unwrap()
    };
    let a = run(1);
    let b = run(2);
    assert_ne!(a.measure, b.measure);
    assert!((a.measure - b.measure).abs() <= 3.0 * (a.std_error.hypot(b.std_error)) + a.tail_bound + b.tail_bound);
}

#[test]
fn constant_function_has_empty_level_sets_when_permitted() {
    let c = cat("constant_one", 2);
    let cfg = EstimatorConfig { permit_non_lp: true, box_halfwidth: Some(3.0), ..Default::default() };
    let prof = measure_profile(&c, &s0(2.0), &geometric_grid(0.01, 2.0, 6), &cfg).unwrap();
    assert!(prof.entries.iter().all(|e| e.scaled_value == 0.0));
    assert!(matches!(level_set_measure(&c, &s0(2.0), 1.0, &EstimatorConfig::default()), Err(Error::NotInLp { .. })));
}

#[test]
fn zero_function_profile() {
    let z = TestFunction::zero(3);
    let prof = measure_profile(&z, &s0(2.0), &[0.1, 1.0, 10.0], &EstimatorConfig::default()).unwrap();
    assert!(prof.entries.iter().all(|e| e.scaled_value == 0.0));
    assert_eq!(weak_lp_quasinorm(&prof).unwrap(), 0.0);
}

#[test]
fn weak_norm_of_indicator_and_gaussian() {
    let u = cat("cube_indicator", 1);
    let prof = measure_profile(&u, &s0(1.0), &geometric_grid(1e-4, 2.0, 14), &EstimatorConfig::default()).unwrap();
    assert!((weak_lp_quasinorm(&prof).unwrap() - 4.0).abs() < 1e-3);
    let g = cat("gaussian", 1);
    let prof = measure_profile(&g, &s0(2.0), &geometric_grid(1e-3, 2.0, 12), &EstimatorConfig::default()).unwrap();
    let w = weak_lp_quasinorm(&prof).unwrap();
    // [(2κ₁‖u‖₂²)^{1/2}, (8κ₁‖u‖₂²)^{1/2}] with ‖u‖₂² = 2^{-1/2}
    let lower = (4.0 * 0.5f64.sqrt()).sqrt();
    let upper = (16.0 * 0.5f64.sqrt()).sqrt();
    assert!(w >= lower * (1.0 - 1e-3) && w <= upper, "{w}");
}

#[test]
fn bounds_hold_for_two_dimensional_gaussian() {
    let g = cat("gaussian", 2);
    let prof = measure_profile(&g, &s0(1.0), &geometric_grid(2.5e-4, 2.0, 12), &EstimatorConfig::default()).unwrap();
    let r = check_theorem11_bounds(&g, 1.0, &prof).unwrap();
    assert!(r.passed, "{r:?}");
    assert!((r.diagnostic("lower").unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    // 2^{p+1}κ₂‖u‖₁ = 4π at p = 1
    assert!((r.diagnostic("upper").unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn sphere_integral_examples() {
    assert_eq!(sphere_integral(2.5, 1, &[-1.0]).unwrap(), 2.0);
    assert!((sphere_integral(2.0, 2, &[0.0, 1.0]).unwrap() - std::f64::consts::PI).abs() < 1e-12);
    assert!((sphere_integral(1.0, 2, &[1.0, 0.0]).unwrap() - 4.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn measure_is_monotone_in_lambda(a in 0.05f64..3.0, ratio in 1.01f64..4.0, name_idx in 0usize..3, p in 1.0f64..3.0) {
        let name = ["gaussian", "bump", "cube_indicator"][name_idx];
        let u = cat(name, 1);
        let cfg = EstimatorConfig::default();
        let m1 = level_set_measure(&u, &s0(p), a, &cfg).unwrap();
        let m2 = level_set_measure(&u, &s0(p), a * ratio, &cfg).unwrap();
        prop_assert!(m1.measure >= m2.measure - (m1.error() + m2.error()));
    }

    #[test]
    fn upper_envelope(lambda in 0.01f64..5.0, p in 1.0f64..3.0, name_idx in 0usize..3) {
        let name = ["gaussian", "bump", "cube_indicator"][name_idx];
        let u = cat(name, 1);
        let m = level_set_measure(&u, &s0(p), lambda, &EstimatorConfig::default()).unwrap();
        let norm = lp_norm_best(&u, p).unwrap().value;
        let bound = 2f64.powf(p + 1.0) * unit_ball_volume(1) * norm.powf(p);
        prop_assert!(lambda.powf(p) * m.measure <= bound + lambda.powf(p) * m.error());
    }

    #[test]
    fn translation_invariance(shift in -3.0f64..3.0, lambda in 0.05f64..2.0) {
        let u = cat("bump", 1);
        let cfg = EstimatorConfig::default();
        let a = level_set_measure(&u, &s0(2.0), lambda, &cfg).unwrap();
        let b = level_set_measure(&u.translated(&[shift]), &s0(2.0), lambda, &cfg).unwrap();
        prop_assert!((a.measure - b.measure).abs() <= a.error() + b.error() + 1e-6 * a.measure, "{a:?} {b:?}");
    }

    #[test]
    fn homogeneity_of_the_supremum(p in 1.0f64..3.0) {
        let u = cat("bump", 1);
        let grid = geometric_grid(0.01, 2.0, 10);
        let cfg = EstimatorConfig::default();
        let a = measure_profile(&u, &s0(p), &grid, &cfg).unwrap();
        let grid2: Vec<f64> = grid.iter().map(|l| 2.0 * l).collect();
        let b = measure_profile(&u.scaled(2.0), &s0(p), &grid2, &cfg).unwrap();
        let want = 2f64.powf(p) * a.sup_value;
        prop_assert!((b.sup_value - want).abs() <= 0.02 * want);
    }
}
