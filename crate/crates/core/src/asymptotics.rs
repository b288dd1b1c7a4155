//! Limit extrapolation and the four limit formulas: λ → 0⁺ (L^p norm),
//! λ → ∞ (gradient norm), s → 1⁻ and s → 0⁺ of the Gagliardo seminorm.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{gradient_lp_norm_best, integrate_box, lp_norm_best, TestFunction};
use crate::measure::{measure_profile, EstimatorConfig, QuotientParams};
use crate::norms::{
    bbm_constant, gagliardo_seminorm, unit_ball_volume, Direction, LimitEstimate, SeminormConfig, SeminormDomain,
    WeakNormProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    LpFormula,
    GradientFormula,
    Bbm,
    Msh,
    Bounds,
    EmbeddingScan,
    FppScan,
    KernelDecay,
    Density,
}

impl FormulaId {
    pub const ALL: [FormulaId; 9] = [
        FormulaId::LpFormula,
        FormulaId::GradientFormula,
        FormulaId::Bbm,
        FormulaId::Msh,
        FormulaId::Bounds,
        FormulaId::EmbeddingScan,
        FormulaId::FppScan,
        FormulaId::KernelDecay,
        FormulaId::Density,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::LpFormula => "lp_formula",
            FormulaId::GradientFormula => "gradient_formula",
            FormulaId::Bbm => "bbm",
            FormulaId::Msh => "msh",
            FormulaId::Bounds => "bounds",
            FormulaId::EmbeddingScan => "embedding_scan",
            FormulaId::FppScan => "fpp_scan",
            FormulaId::KernelDecay => "kernel_decay",
            FormulaId::Density => "density",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == name)
    }

    /// Relative tolerance used when none is configured.
    pub fn default_tolerance(self) -> f64 {
        match self {
            FormulaId::LpFormula => 0.03,
            FormulaId::GradientFormula => 0.05,
            FormulaId::Bbm | FormulaId::Msh | FormulaId::Bounds => 0.02,
            FormulaId::KernelDecay => 0.05,
            // ratio scans compare max/median against 3
            FormulaId::EmbeddingScan | FormulaId::FppScan => 0.0,
            FormulaId::Density => 1e-3,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FormulaId::LpFormula => "λ→0⁺ limit of λ^p·|E_λ| against 2κ_N‖u‖_p^p",
            FormulaId::GradientFormula => "λ→∞ limit of λ^p·|E_λ| (s = 1) against k(p,N)‖∇u‖_p^p / N",
            FormulaId::Bbm => "s→1⁻ limit of (1−s)|u|^p_{W^{s,p}(Ω)} against k(p,N)‖∇u‖^p_{L^p(Ω)} / p",
            FormulaId::Msh => "s→0⁺ limit of s|u|^p_{W^{s,p}} against 2Nκ_N‖u‖_p^p / p",
            FormulaId::Bounds => "2κ_N‖u‖_p^p ≤ sup_λ λ^p|E_λ| ≤ 2^{p+1}κ_N‖u‖_p^p",
            FormulaId::EmbeddingScan => "weak-norm / Bessel or Triebel-Lizorkin norm bounded uniformly in s",
            FormulaId::FppScan => "Gagliardo / ([s(1−s)]^{-max(1/2,1/p)} F^s_{p,p} norm) bounded uniformly in s",
            FormulaId::KernelDecay => "|x|^{N+1}|∇K_j(x)| scale invariance across j and envelope in t",
            FormulaId::Density => "u_{J,δ} → u in the homogeneous Triebel-Lizorkin norm",
        }
    }
}

impl std::fmt::Display for FormulaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of a profile or scan table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// λ or s.
    pub x: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub formula_id: FormulaId,
    pub measured: f64,
    pub reference: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub diagnostics: Vec<(String, f64)>,
    pub table: Vec<Row>,
}

impl VerificationReport {
    pub fn new(formula_id: FormulaId, measured: f64, reference: f64, rel_error: f64, tolerance: f64) -> Self {
        Self {
            formula_id,
            measured,
            reference,
            rel_error,
            tolerance,
            passed: rel_error <= tolerance,
            diagnostics: Vec::new(),
            table: Vec::new(),
        }
    }

    /// Compares against a reference; relative error, or absolute when the
    /// reference is zero. `abs_err` widens the tolerance by the estimated
    /// numerical error.
    pub fn compare(formula_id: FormulaId, measured: f64, reference: f64, abs_err: f64, rel_tol: f64) -> Self {
        let scale = if reference != 0.0 { reference.abs() } else { 1.0 };
        Self::new(formula_id, measured, reference, (measured - reference).abs() / scale, rel_tol + abs_err / scale)
    }

    pub fn push(&mut self, name: &str, value: f64) {
        self.diagnostics.push((name.to_string(), value));
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|d| d.0 == name).map(|d| d.1)
    }
}

/// Least-squares fit y = a + b·t.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Standard error of the intercept.
    pub intercept_error: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_affine(t: &[f64], y: &[f64]) -> Result<AffineFit> {
    let n = t.len();
    if n < 2 || y.len() != n {
        return Err(invalid("affine fit needs at least two matching points"));
    }
    let nf = n as f64;
    let tm = t.iter().sum::<f64>() / nf;
    let ym = y.iter().sum::<f64>() / nf;
    let stt: f64 = t.iter().map(|v| (v - tm) * (v - tm)).sum();
    if stt == 0.0 {
        return Err(invalid("affine fit needs distinct abscissae"));
    }
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let residuals: Vec<f64> = t.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    let intercept_error = if n > 2 {
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (nf - 2.0);
        (s2 * (1.0 / nf + tm * tm / stt)).sqrt()
    } else {
        0.0
    };
    Ok(AffineFit { intercept, slope, intercept_error, residuals })
}

/// Fits y = a + b·t and returns a; `t` → 0 is the limit. The point nearest
/// the limit is compared with the line through the others: a deviation above
/// ten times their scatter, above 1% and above their whole spread means the
/// grid has not reached the asymptotic regime.
pub fn extrapolate_series(t: &[f64], y: &[f64], errors: &[f64]) -> Result<(f64, f64, AffineFit)> {
    if t.len() < 3 {
        return Err(invalid("extrapolation needs at least 3 points"));
    }
    let fit = fit_affine(t, y)?;
    if y.iter().all(|&v| v == 0.0) {
        return Ok((0.0, errors.iter().cloned().fold(0.0, f64::max), fit));
    }
    let near = (0..t.len()).min_by(|&i, &j| t[i].abs().total_cmp(&t[j].abs())).unwrap();
    let floor = 1e-12 * (1.0 + fit.intercept.abs());
    let (t_rest, y_rest): (Vec<f64>, Vec<f64>) =
        (0..t.len()).filter(|&i| i != near).map(|i| (t[i], y[i])).unzip();
    let rest = fit_affine(&t_rest, &y_rest)?;
    let predicted = rest.intercept + rest.slope * t[near];
    let deviation = (y[near] - predicted).abs();
    let scatter = rest.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let spread = y_rest.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - y_rest.iter().cloned().fold(f64::INFINITY, f64::min);
    let jump = (1e-2 * (predicted.abs() + floor)).max(spread);
    if deviation > 10.0 * scatter.max(floor + errors[near]) && deviation > jump {
        return Err(Error::NotAsymptotic(format!(
            "value {} nearest the limit deviates by {deviation:e} from the trend {predicted} of the other points",
            y[near]
        )));
    }
    let err = fit.intercept_error + errors[near] + floor;
    Ok((fit.intercept, err, fit))
}

/// Extrapolates λ^p·m(λ) to λ → 0⁺ (model a + bλ^p) or λ → ∞ (model a + b/λ)
/// and stores the result in the profile.
pub fn extrapolate_limit(profile: &mut WeakNormProfile, direction: Direction) -> Result<LimitEstimate> {
    let t: Vec<f64> = profile
        .entries
        .iter()
        .map(|e| match direction {
            Direction::ToZero => e.lambda.powf(profile.p),
            Direction::ToInfinity => 1.0 / e.lambda,
        })
        .collect();
    let y: Vec<f64> = profile.entries.iter().map(|e| e.scaled_value).collect();
    let errs: Vec<f64> = profile.entries.iter().map(|e| e.error).collect();
    let (value, error, _) = extrapolate_series(&t, &y, &errs)?;
    let est = LimitEstimate { value, error, direction };
    profile.limit_estimate = Some(est);
    Ok(est)
}

fn profile_rows(profile: &WeakNormProfile) -> Vec<Row> {
    profile.entries.iter().map(|e| Row { x: e.lambda, value: e.scaled_value, error: e.error }).collect()
}

fn push_tails(report: &mut VerificationReport, profile: &WeakNormProfile) {
    if let (Some(first), Some(last)) = (profile.entries.first(), profile.entries.last()) {
        report.push("smallest_lambda", first.lambda);
        report.push("value_at_smallest_lambda", first.scaled_value);
        report.push("largest_lambda", last.lambda);
        report.push("value_at_largest_lambda", last.scaled_value);
    }
    report.push("sup_value", profile.sup_value);
    report.push("sup_error", profile.sup_error);
}

/// λ^p·𝓛^{2N}(E_λ) → 2κ_N‖u‖_p^p as λ → 0⁺.
pub fn verify_lp_formula(
    u: &TestFunction,
    p: f64,
    cfg: &EstimatorConfig,
    grid: &[f64],
    tolerance: f64,
) -> Result<VerificationReport> {
    if !u.is_in_lp() {
        return Err(Error::NotInLp {
            name: u.name().to_string(),
            reason: "for u identically 1 every level set E_λ is empty, so λ^p·|E_λ| = 0 for all λ, while \
                     ‖u‖_p = ∞; the limit formula only holds for u in L^p"
                .into(),
        });
    }
    let q = QuotientParams::new(0.0, p)?;
    let norm = lp_norm_best(u, p)?;
    let mut profile = measure_profile(u, &q, grid, cfg)?;
    let limit = extrapolate_limit(&mut profile, Direction::ToZero)?;
    let kappa = unit_ball_volume(u.dimension());
    let power = norm.value.powf(p);
    let reference = 2.0 * kappa * power;
    let ref_err = if norm.value > 0.0 { 2.0 * kappa * p * power * norm.error / norm.value } else { 0.0 };
    let mut report = VerificationReport::compare(FormulaId::LpFormula, limit.value, reference, limit.error + ref_err, tolerance);
    report.push("p", p);
    report.push("dimension", u.dimension() as f64);
    report.push("limit_error", limit.error);
    push_tails(&mut report, &profile);
    report.table = profile_rows(&profile);
    Ok(report)
}

/// λ^p·𝓛^{2N}(Ẽ_λ) → k(p,N)‖∇u‖_p^p / N as λ → ∞, with s = 1.
pub fn verify_gradient_formula(
    u: &TestFunction,
    p: f64,
    cfg: &EstimatorConfig,
    grid: &[f64],
    tolerance: f64,
) -> Result<VerificationReport> {
    if !u.smoothness().is_smooth() {
        return Err(Error::NotAdmissible {
            name: u.name().to_string(),
            check: FormulaId::GradientFormula.to_string(),
            reason: format!("the gradient limit needs a smooth function, got {:?}", u.smoothness()),
        });
    }
    if !u.is_in_lp() {
        return Err(u.not_in_lp_error());
    }
    let q = QuotientParams::new(1.0, p)?;
    let grad = gradient_lp_norm_best(u, p)?;
    let mut profile = measure_profile(u, &q, grid, cfg)?;
    let limit = extrapolate_limit(&mut profile, Direction::ToInfinity)?;
    let n = u.dimension();
    let power = grad.value.powf(p);
    let reference = bbm_constant(p, n) * power / n as f64;
    let ref_err = if grad.value > 0.0 { reference * p * grad.error / grad.value } else { 0.0 };
    let mut report =
        VerificationReport::compare(FormulaId::GradientFormula, limit.value, reference, limit.error + ref_err, tolerance);
    report.push("p", p);
    report.push("dimension", n as f64);
    report.push("gradient_norm", grad.value);
    report.push("limit_error", limit.error);
    push_tails(&mut report, &profile);
    report.table = profile_rows(&profile);
    Ok(report)
}

/// ‖∇u‖^p_{L^p(Ω)}: the oracle when Ω is the function's own domain,
/// quadrature of the gradient otherwise.
fn gradient_power_on_box(u: &TestFunction, p: f64, omega: &[(f64, f64)]) -> Result<f64> {
    if u.natural_domain() == Some(omega) {
        if let Some(v) = u.analytic_gradient_lp_norm(p) {
            return Ok(v.powf(p));
        }
    }
    if u.gradient(&vec![0.0; u.dimension()]).is_none() {
        return Err(Error::MissingOracle { name: u.name().to_string(), what: "gradient rule".into() });
    }
    let f = |x: &[f64]| {
        let g = u.gradient(x).unwrap_or_default();
        g.iter().map(|c| c * c).sum::<f64>().sqrt().powf(p)
    };
    Ok(integrate_box(&f, omega, u.axis_breaks(), 1e-10)?.value)
}

/// (1 − s)|u|^p_{W^{s,p}(Ω)} → k(p,N)‖∇u‖^p_{L^p(Ω)} / p as s → 1⁻.
pub fn verify_bbm(
    u: &TestFunction,
    p: f64,
    omega: &[(f64, f64)],
    s_grid: &[f64],
    cfg: &SeminormConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    check_s_grid(s_grid)?;
    if s_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max) < 0.9 {
        return Err(invalid("BBM extrapolation needs max s >= 0.9"));
    }
    if u.smoothness() == crate::fields::Smoothness::Indicator {
        return Err(Error::NotAdmissible {
            name: u.name().to_string(),
            check: FormulaId::Bbm.to_string(),
            reason: "needs u in W^{1,p}(Ω)".into(),
        });
    }
    let domain = SeminormDomain::Box(omega.to_vec());
    let mut t = Vec::new();
    let mut y = Vec::new();
    let mut e = Vec::new();
    let mut table = Vec::new();
    for &s in s_grid {
        let g = gagliardo_seminorm(u, s, p, &domain, cfg)?;
        t.push(1.0 - s);
        y.push((1.0 - s) * g.power);
        e.push((1.0 - s) * g.power_error);
        table.push(Row { x: s, value: (1.0 - s) * g.power, error: (1.0 - s) * g.power_error });
    }
    let (value, err, fit) = extrapolate_series(&t, &y, &e)?;
    let grad = gradient_power_on_box(u, p, omega)?;
    let reference = bbm_constant(p, u.dimension()) * grad / p;
    let mut report = VerificationReport::compare(FormulaId::Bbm, value, reference, err, tolerance);
    report.push("p", p);
    report.push("slope", fit.slope);
    report.push("limit_error", err);
    report.table = table;
    Ok(report)
}

/// s|u|^p_{W^{s,p}(R^N)} → 2Nκ_N‖u‖_p^p / p as s → 0⁺.
pub fn verify_msh(
    u: &TestFunction,
    p: f64,
    s_grid: &[f64],
    cfg: &SeminormConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    check_s_grid(s_grid)?;
    if s_grid.iter().cloned().fold(f64::INFINITY, f64::min) > 0.05 {
        return Err(invalid("Maz'ya-Shaposhnikova extrapolation needs min s <= 0.05"));
    }
    if !u.is_in_lp() {
        return Err(u.not_in_lp_error());
    }
    let mut t = Vec::new();
    let mut y = Vec::new();
    let mut e = Vec::new();
    let mut table = Vec::new();
    for &s in s_grid {
        let g = gagliardo_seminorm(u, s, p, &SeminormDomain::AllSpace, cfg)?;
        t.push(s);
        y.push(s * g.power);
        e.push(s * g.power_error);
        table.push(Row { x: s, value: s * g.power, error: s * g.power_error });
    }
    let (value, err, fit) = extrapolate_series(&t, &y, &e)?;
    let n = u.dimension();
    let norm = lp_norm_best(u, p)?;
    let reference = 2.0 * n as f64 * unit_ball_volume(n) * norm.value.powf(p) / p;
    let mut report = VerificationReport::compare(FormulaId::Msh, value, reference, err, tolerance);
    report.push("p", p);
    report.push("slope", fit.slope);
    report.push("limit_error", err);
    report.table = table;
    Ok(report)
}

fn check_s_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.len() < 3 {
        return Err(invalid("s grid needs at least 3 points"));
    }
    if s_grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(invalid("s grid values must lie in (0, 1)"));
    }
    Ok(())
}
