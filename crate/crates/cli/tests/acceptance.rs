//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lplevel::asymptotics::{extrapolate_limit, verify_bbm, verify_gradient_formula, verify_lp_formula, verify_msh};
use lplevel::fields::{Catalog, TestFunction, CATALOG_NAMES};
use lplevel::measure::{geometric_grid, level_set_measure, measure_profile, sphere_integral, EstimatorConfig, QuotientParams};
use lplevel::norms::{
    bbm_constant, check_theorem11_bounds, gagliardo_seminorm, unit_ball_volume, Direction, SeminormConfig, SeminormDomain,
};
use lplevel::spectral::*;
use lplevel::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

type Check = fn() -> Result<Verdict, Error>;

fn cat(name: &str, dim: usize) -> TestFunction {
    Catalog::standard().get(name, dim).expect("catalog entry")
}

fn estimator(dim: usize) -> EstimatorConfig {
    let mut cfg = EstimatorConfig::default();
    if dim == 2 {
        cfg.samples_or_nodes = 4096;
    }
    cfg
}

fn within(budget: Duration, start: Instant) -> (bool, f64) {
    let t = start.elapsed();
    (t <= budget, t.as_secs_f64())
}

fn indicator_oracle() -> Result<Verdict, Error> {
    let start = Instant::now();
    let u = cat("cube_indicator", 1);
    let q = QuotientParams::new(0.0, 1.0)?;
    let mut profile = measure_profile(&u, &q, &[0.1, 0.25, 0.5], &EstimatorConfig::default())?;
    let mut worst = 0.0f64;
    for e in &profile.entries {
        let want = 4.0 - 2.0 * e.lambda;
        worst = worst.max((e.scaled_value - want).abs() / want);
    }
    let limit = extrapolate_limit(&mut profile, Direction::ToZero)?;
    let limit_err = (limit.value - 4.0).abs() / 4.0;
    let (fast, secs) = within(Duration::from_secs(30), start);
    Ok(verdict(
        worst <= 0.01 && limit_err <= 0.01 && fast,
        format!("max rel dev from 4-2λ {worst:.2e}, limit {:.6} (rel {limit_err:.2e}), {secs:.1}s", limit.value),
    ))
}

fn gaussian_limits() -> Result<Verdict, Error> {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for dim in [1, 2] {
        for p in [1.0, 2.0] {
            let u = cat("gaussian", dim);
            let r = verify_lp_formula(&u, p, &estimator(dim), &geometric_grid(1e-3, 2.0, 6), 0.03)?;
            let want = 2.0 * unit_ball_volume(dim) * p.powf(-(dim as f64) / 2.0);
            let rel = (r.measured - want).abs() / want;
            ok &= rel <= 0.03;
            parts.push(format!("N{dim} p{p}: {rel:.2e}"));
        }
    }
    let (fast, secs) = within(Duration::from_secs(300), start);
    Ok(verdict(ok && fast, format!("{}, {secs:.1}s", parts.join(", "))))
}

fn bound_sandwich() -> Result<Verdict, Error> {
    let mut ok = true;
    let mut count = 0;
    let mut failures = Vec::new();
    for dim in [1, 2] {
        for name in CATALOG_NAMES {
            let u = cat(name, dim);
            if !u.is_in_lp() {
                continue;
            }
            for p in [1.0, 2.0] {
                let q = QuotientParams::new(0.0, p)?;
                let profile = measure_profile(&u, &q, &geometric_grid(1e-3, 2.0, 6), &estimator(dim))?;
                let r = check_theorem11_bounds(&u, p, &profile)?;
                count += 1;
                if !r.passed {
                    ok = false;
                    failures.push(format!("{name} N{dim} p{p}"));
                }
            }
        }
    }
    Ok(verdict(ok, format!("{count} cases, failures: {}", if failures.is_empty() { "none".into() } else { failures.join(", ") })))
}

fn constant_counterexample() -> Result<Verdict, Error> {
    let u = cat("constant_one", 1);
    let cfg = EstimatorConfig { permit_non_lp: true, ..EstimatorConfig::default() };
    let q = QuotientParams::new(0.0, 1.0)?;
    let mut all_zero = true;
    for lambda in geometric_grid(1e-3, 4.0, 8) {
        all_zero &= level_set_measure(&u, &q, lambda, &cfg)?.measure == 0.0;
    }
    let refused = matches!(
        verify_lp_formula(&u, 1.0, &EstimatorConfig::default(), &geometric_grid(1e-3, 2.0, 6), 0.03),
        Err(Error::NotInLp { .. })
    );
    Ok(verdict(all_zero && refused, format!("measure identically 0: {all_zero}, verify_lp_formula refuses: {refused}")))
}

fn constant_identities() -> Result<Verdict, Error> {
    let dirs: [&[f64]; 3] = [&[1.0], &[0.6, 0.8], &[0.0, 0.6, 0.8]];
    let mut worst = 0.0f64;
    for p in [1.0, 2.0, 3.5] {
        for n in 1..=3 {
            let k = bbm_constant(p, n);
            worst = worst.max((k - sphere_integral(p, n, dirs[n - 1])?).abs());
        }
    }
    let kappa = [(1, 2.0), (2, PI), (3, 4.0 * PI / 3.0)]
        .iter()
        .map(|&(n, v)| (unit_ball_volume(n) - v).abs())
        .fold(0.0f64, f64::max);
    Ok(verdict(worst <= 1e-6 && kappa <= 1e-12, format!("k vs sphere {worst:.1e}, κ {kappa:.1e}")))
}

fn msh() -> Result<Verdict, Error> {
    let u = cat("cube_indicator", 1);
    let cfg = SeminormConfig::default();
    let mut worst = 0.0f64;
    for s in [0.05, 0.1] {
        let g = gagliardo_seminorm(&u, s, 1.0, &SeminormDomain::AllSpace, &cfg)?;
        let want = 4.0 / (1.0 - s);
        worst = worst.max((s * g.power - want).abs() / want);
    }
    let r = verify_msh(&u, 1.0, &[0.1, 0.05, 0.025, 0.0125], &cfg, 0.02)?;
    let rel = (r.measured - 4.0).abs() / 4.0;
    Ok(verdict(
        worst <= 0.01 && rel <= 0.02,
        format!("closed form rel {worst:.2e}, limit {:.6} (rel {rel:.2e})", r.measured),
    ))
}

fn bbm() -> Result<Verdict, Error> {
    let u = cat("ramp", 1);
    let cfg = SeminormConfig::default();
    let omega = [(0.0, 1.0)];
    let mut worst = 0.0f64;
    for s in [0.7, 0.9] {
        let g = gagliardo_seminorm(&u, s, 2.0, &SeminormDomain::Box(omega.to_vec()), &cfg)?;
        let want = 1.0 / (3.0 - 2.0 * s);
        worst = worst.max(((1.0 - s) * g.power - want).abs() / want);
    }
    let r = verify_bbm(&u, 2.0, &omega, &[0.9, 0.95, 0.975, 0.99], &cfg, 0.02)?;
    let rel = (r.measured - 1.0).abs();
    let reference_ok = (r.reference - 0.5 * bbm_constant(2.0, 1)).abs() < 1e-12 && bbm_constant(2.0, 1) == 2.0;
    Ok(verdict(
        worst <= 0.01 && rel <= 0.02 && reference_ok,
        format!("closed form rel {worst:.2e}, limit {:.6} (rel {rel:.2e}), reference {}", r.measured, r.reference),
    ))
}

fn gradient_formula() -> Result<Verdict, Error> {
    let u = cat("bump", 1);
    let r = verify_gradient_formula(&u, 2.0, &EstimatorConfig::default(), &geometric_grid(4.0, 2.0, 6), 0.05)?;
    let rel = (r.measured - r.reference).abs() / r.reference;
    Ok(verdict(rel <= 0.05, format!("limit {:.6} vs k(2,1)‖u′‖² = {:.6} (rel {rel:.2e})", r.measured, r.reference)))
}

fn spectral_exactness() -> Result<Verdict, Error> {
    let c = CutoffPair::default();
    let g = SpectralGrid::default_for(1)?;
    let packet = cat("bandlimited", 1);
    let u = GridField::sample(g, &packet)?;
    let l2 = u.lp_norm(2.0);
    let hom = littlewood_paley(&u, &c, g.band_range(), false)?.reconstruct()?;
    let inhom = littlewood_paley(&u, &c, (1, g.band_range().1), true)?.reconstruct()?;
    let recon = (hom.sub(&u)?.lp_norm(2.0) / l2).max(inhom.sub(&u)?.lp_norm(2.0) / l2);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut unity = 0.0f64;
    for _ in 0..1000 {
        let r = 10f64.powf(rng.gen_range(-6.0..6.0));
        let inh = c.phi(r) + (1..=40).map(|j| c.psi_j(j, r)).sum::<f64>();
        let hom: f64 = (-40..=40).map(|j| c.psi_j(j, r)).sum();
        unity = unity.max((inh - 1.0).abs()).max((hom - 1.0).abs());
    }

    // Parseval against a direct O(M²) transform
    let pg = SpectralGrid::new(1, 8.0, 256)?;
    let pu = GridField::sample(pg, &packet)?;
    let range = pg.band_range();
    let norm = tl_norm(&pu, &TLParams::new(0.0, 2.0, 2.0, true)?, &c, range)?.value;
    let m = pg.points_per_axis;
    let direct: f64 = (0..m)
        .map(|k| {
            let xi = pg.frequency(k)[0];
            let v: Complex64 = pu
                .data
                .iter()
                .enumerate()
                .map(|(n, v)| v * Complex64::from_polar(1.0, -2.0 * PI * xi * pg.point(n)[0]))
                .sum::<Complex64>()
                * pg.spacing();
            let w: f64 = (range.0..=range.1).map(|j| c.psi_j(j, xi.abs()).powi(2)).sum();
            w * v.norm_sqr() * pg.frequency_step()
        })
        .sum();
    let parseval = (norm * norm - direct).abs() / direct;

    let z1 = Complex64::new(0.3, 0.7);
    let z2 = Complex64::new(-0.55, 1.1);
    let a = fractional_laplacian(&fractional_laplacian(&u, z1)?, z2)?;
    let b = fractional_laplacian(&u, z1 + z2)?;
    let group = a.sub(&b)?.lp_norm(2.0) / b.lp_norm(2.0);

    let dilated = |x: &[f64]| packet.evaluate(&[2.0 * x[0]]);
    let same = GridField::from_fn(g, dilated);
    let half = GridField::from_fn(SpectralGrid::new(1, 8.0, 1024)?, dilated);
    let mut dilation = 0.0f64;
    for (s, p, f2) in [(0.5, 2.0, &same), (0.25, 2.0, &same), (0.7, 3.0, &half), (0.2, 1.5, &half)] {
        let params = TLParams::new(s, p, 2.0, true)?;
        let a = tl_norm(&u, &params, &c, (-6, 6))?.value;
        let b = tl_norm(f2, &params, &c, (-6, 6))?.value;
        let want = 2f64.powf(s - 1.0 / p) * a;
        dilation = dilation.max((b - want).abs() / want);
    }
    Ok(verdict(
        recon <= 1e-8 && unity <= 1e-12 && parseval <= 1e-10 && group <= 1e-10 && dilation <= 1e-6,
        format!(
            "reconstruction {recon:.1e}, unity {unity:.1e}, parseval {parseval:.1e}, group law {group:.1e}, dilation {dilation:.1e}"
        ),
    ))
}

const SCAN_FUNCTIONS: [&str; 3] = ["gaussian", "bump", "bandlimited"];
const SCAN_P: [f64; 3] = [1.5, 2.0, 3.0];
const SCAN_S: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn embedding_scans() -> Result<Verdict, Error> {
    let cfg = ScanConfig::default();
    let mut worst = 0.0f64;
    let mut ok = true;
    for name in SCAN_FUNCTIONS {
        let u = cat(name, 1);
        for p in SCAN_P {
            for mode in [ScanMode::Bessel, ScanMode::HomogeneousTl] {
                let rows = embedding_ratio_scan(&u, p, &SCAN_S, mode, &cfg)?;
                let r = scan_report(lplevel::asymptotics::FormulaId::EmbeddingScan, &rows)?;
                ok &= r.passed;
                worst = worst.max(r.measured);
            }
        }
    }
    Ok(verdict(ok, format!("18 scans, worst max/median {worst:.3} (bound {RATIO_SPREAD_BOUND})")))
}

fn fpp_scans() -> Result<Verdict, Error> {
    let cfg = ScanConfig::default();
    let mut worst = 0.0f64;
    let mut ok = true;
    for name in SCAN_FUNCTIONS {
        let u = cat(name, 1);
        for p in SCAN_P {
            let rows = fpp_ratio_scan(&u, p, &SCAN_S, &cfg)?;
            let r = scan_report(lplevel::asymptotics::FormulaId::FppScan, &rows)?;
            ok &= r.passed;
            worst = worst.max(r.measured);
        }
    }
    Ok(verdict(ok, format!("9 scans, worst max/median {worst:.3} (bound {RATIO_SPREAD_BOUND})")))
}

fn kernel_decay() -> Result<Verdict, Error> {
    let grid = SpectralGrid::new(1, 64.0, 1 << 17)?;
    let r = kernel_decay_report(0.5, &[-2, -1, 0, 1, 2], &[0.0, 1.0, 5.0], &grid, &CutoffPair::default(), 0.05)?;
    let j_spread = r.diagnostic("j_spread").unwrap_or(f64::NAN);
    let t_factor = r.diagnostic("t_factor").unwrap_or(f64::NAN);
    Ok(verdict(
        j_spread <= 0.05 && t_factor <= KERNEL_ENVELOPE_FACTOR,
        format!("j spread {j_spread:.2e} (≤ 5%), t factor {t_factor:.3} (≤ {KERNEL_ENVELOPE_FACTOR})"),
    ))
}

fn determinism() -> Result<Verdict, Error> {
    let tmp = std::env::temp_dir().join(format!("lplevel-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&tmp);
    fs::create_dir_all(&tmp)?;
    let config = tmp.join("run.toml");
    fs::write(
        &config,
        r#"rng_seed = 99

[[experiments]]
formula_id = "lp_formula"
function = "gaussian"
p = 2.0

[[experiments]]
name = "mc"
formula_id = "bounds"
function = "gaussian"
p = 1.0
lambdas = [0.05, 0.1, 0.2]
tolerance = 0.1
[experiments.estimator]
method = "stratified_mc"
samples_or_nodes = 64

[[experiments]]
formula_id = "msh"
function = "cube_indicator"

[[experiments]]
formula_id = "density"
function = "bump"
big_j = [1, 2, 3]
tolerance = 1.0
"#,
    )?;
    let mut bodies = Vec::new();
    for jobs in ["1", "2", "5"] {
        let out = tmp.join(format!("jobs{jobs}"));
        let status = Command::new(env!("CARGO_BIN_EXE_lplevel"))
            .arg("--config")
            .arg(&config)
            .arg("--output")
            .arg(&out)
            .args(["--jobs", jobs])
            .output()?
            .status;
        if !status.success() {
            return Ok(verdict(false, format!("run with --jobs {jobs} exited with {status}")));
        }
        bodies.push(csv_files(&out)?);
    }
    let _ = fs::remove_dir_all(&tmp);
    let identical = bodies.windows(2).all(|w| w[0] == w[1]);
    Ok(verdict(identical && bodies[0].len() == 4, format!("{} CSV files, --jobs 1/2/5 identical: {identical}", bodies[0].len())))
}

fn csv_files(dir: &Path) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|x| x == "csv") {
            out.push((path.file_name().unwrap_or_default().to_string_lossy().into_owned(), fs::read(&path)?));
        }
    }
    out.sort();
    Ok(out)
}

fn main() {
    let criteria: [(&str, Check); 13] = [
        ("indicator oracle, λ→0 limit", indicator_oracle),
        ("Gaussian λ→0 limits, N ∈ {1,2}, p ∈ {1,2}", gaussian_limits),
        ("two-sided bound on sup λ^p|E_λ|", bound_sandwich),
        ("constant function counterexample", constant_counterexample),
        ("κ_N and k(p,N) identities", constant_identities),
        ("s→0 limit of the Gagliardo seminorm", msh),
        ("s→1 limit of the Gagliardo seminorm", bbm),
        ("λ→∞ gradient limit", gradient_formula),
        ("spectral exactness", spectral_exactness),
        ("embedding ratio scans", embedding_scans),
        ("F^s_{p,p} ratio scans", fpp_scans),
        ("kernel decay invariance", kernel_decay),
        ("CLI determinism across --jobs", determinism),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let v = check().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        if !v.passed {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} {name}: {} [{:.1}s]",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
