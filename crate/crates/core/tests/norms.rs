use std::f64::consts::PI;

use lplevel::fields::{lp_norm, truncate, Catalog, NormMethod, TestFunction, CATALOG_NAMES};
use lplevel::measure::sphere_integral;
use lplevel::norms::*;
use lplevel::Error;
use proptest::prelude::*;

#[test]
fn ball_volumes() {
    assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
    assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
    assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12);
}

#[test]
fn bbm_constant_equals_sphere_integral() {
    let dirs: [&[f64]; 3] = [&[1.0], &[0.6, -0.8], &[0.48, 0.6, 0.64]];
    for p in [1.0, 2.0, 3.5] {
        for n in 1..=3 {
            let k = bbm_constant(p, n);
            let quad = sphere_integral(p, n, dirs[n - 1]).unwrap();
            assert!((k - quad).abs() <= 1e-6 * k, "p={p} N={n}: {k} vs {quad}");
        }
    }
    assert!((bbm_constant(2.0, 1) - 2.0).abs() < 1e-12);
    assert!((bbm_constant(2.0, 2) - PI).abs() < 1e-12);
    assert!((bbm_constant(1.0, 2) - 4.0).abs() < 1e-12);
}

#[test]
fn gagliardo_closed_forms() {
    let cat = Catalog::standard();
    let ind = cat.get("cube_indicator", 1).unwrap();
    let ramp = cat.get("ramp", 1).unwrap();
    let cfg = SeminormConfig::default();
    let omega = SeminormDomain::Box(vec![(0.0, 1.0)]);
    for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let a = gagliardo_seminorm(&ind, s, 1.0, &SeminormDomain::AllSpace, &cfg).unwrap();
        let want = 4.0 / (s * (1.0 - s));
        assert!((a.value - want).abs() <= 0.01 * want, "indicator s={s}: {}", a.value);
        let b = gagliardo_seminorm(&ramp, s, 2.0, &omega, &cfg).unwrap();
        let want = 1.0 / ((1.0 - s) * (3.0 - 2.0 * s));
        assert!((b.power - want).abs() <= 0.01 * want, "ramp s={s}: {}", b.power);
    }
    let z = gagliardo_seminorm(&TestFunction::zero(2), 0.5, 2.0, &SeminormDomain::AllSpace, &cfg).unwrap();
    assert_eq!(z.value, 0.0);
}

#[test]
fn gagliardo_refuses_divergent_cases() {
    let ind = Catalog::standard().get("cube_indicator", 1).unwrap();
    let r = gagliardo_seminorm(&ind, 0.6, 2.0, &SeminormDomain::AllSpace, &SeminormConfig::default());
    assert!(matches!(r, Err(Error::Singularity(_))));
    assert!(gagliardo_seminorm(&ind, 1.0, 1.0, &SeminormDomain::AllSpace, &SeminormConfig::default()).is_err());
}

#[test]
fn bound_check_examples() {
    let ind = Catalog::standard().get("cube_indicator", 1).unwrap();
    let entries = vec![ProfileEntry { lambda: 1e-6, scaled_value: 4.0 - 2e-6, error: 0.0 }];
    let r = check_theorem11_bounds(&ind, 1.0, &WeakNormProfile::new(1.0, 0.0, entries)).unwrap();
    assert!(r.passed);
    assert_eq!((r.diagnostic("lower"), r.diagnostic("upper")), (Some(4.0), Some(8.0)));
    let zero = TestFunction::zero(1);
    let entries = vec![ProfileEntry { lambda: 1.0, scaled_value: 0.0, error: 0.0 }];
    assert!(check_theorem11_bounds(&zero, 2.0, &WeakNormProfile::new(2.0, 0.0, entries)).unwrap().passed);
    let too_big = vec![ProfileEntry { lambda: 1.0, scaled_value: 9.0, error: 0.0 }];
    assert!(!check_theorem11_bounds(&ind, 1.0, &WeakNormProfile::new(1.0, 0.0, too_big)).unwrap().passed);
}

#[test]
fn catalog_oracles_against_quadrature() {
    let cat = Catalog::standard();
    for dim in 1..=2 {
        for name in CATALOG_NAMES {
            let u = cat.get(name, dim).unwrap();
            if !u.is_in_lp() {
                assert!(matches!(lp_norm(&u, 2.0, NormMethod::Quadrature), Err(Error::NotInLp { .. })));
                continue;
            }
            for p in [1.0, 2.0, 3.0] {
                let Ok(exact) = lp_norm(&u, p, NormMethod::Analytic) else { continue };
                let quad = lp_norm(&u, p, NormMethod::Quadrature).unwrap();
                let scale = exact.value.max(1e-300);
                assert!((quad.value - exact.value).abs() <= 1e-4 * scale, "{name} N={dim} p={p}");
            }
        }
    }
}

#[test]
fn gaussian_norm_examples() {
    let cat = Catalog::standard();
    let g1 = cat.get("gaussian", 1).unwrap();
    assert!((lp_norm(&g1, 2.0, NormMethod::Analytic).unwrap().value - 2f64.powf(-0.25)).abs() < 1e-12);
    let g2 = cat.get("gaussian", 2).unwrap();
    assert!((lp_norm(&g2, 3.0, NormMethod::Analytic).unwrap().value.powi(3) - 1.0 / 3.0).abs() < 1e-12);
    let tail = truncate(&g1, 3.0).unwrap().outer;
    assert!(lp_norm(&tail, 1.0, NormMethod::Quadrature).unwrap().value <= 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncation_partitions(name_idx in 0usize..6, dim in 1usize..=3, radius in 0.05f64..4.0, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let u = Catalog::standard().get(CATALOG_NAMES[name_idx], dim).unwrap();
        let pair = truncate(&u, radius).unwrap();
        let expected = u.support_radius().map_or(radius, |r| r.min(radius));
        prop_assert_eq!(pair.inner.support_radius(), Some(expected));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
            prop_assert_eq!(pair.inner.evaluate(&x) + pair.outer.evaluate(&x), u.evaluate(&x));
        }
    }

    #[test]
    fn support_radius_is_respected(name_idx in 0usize..7, dim in 1usize..=3, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let u = Catalog::standard().get(CATALOG_NAMES[name_idx], dim).unwrap();
        if let Some(r) = u.support_radius() {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = dir.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-9);
                let t = r * (1.0 + 1e-9) + rng.gen_range(0.0..10.0);
                let x: Vec<f64> = dir.iter().map(|c| c / n * t).collect();
                prop_assert_eq!(u.evaluate(&x), 0.0);
            }
        }
    }

    #[test]
    fn outer_tail_shrinks_with_radius(r in 0.2f64..2.5, dr in 0.05f64..1.0) {
        let g = Catalog::standard().get("gaussian", 1).unwrap();
        let a = lp_norm(&truncate(&g, r).unwrap().outer, 2.0, NormMethod::Quadrature).unwrap();
        let b = lp_norm(&truncate(&g, r + dr).unwrap().outer, 2.0, NormMethod::Quadrature).unwrap();
        prop_assert!(b.value <= a.value + a.error + b.error);
    }
}
