use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bands::{bessel_norm, tl_norm, TLParams};
use super::cutoffs::CutoffPair;
use super::grid::{GridField, SpectralGrid};
use crate::asymptotics::{FormulaId, Row, VerificationReport};
use crate::error::{invalid, Error, Result};
use crate::fields::{Smoothness, TestFunction};
use crate::measure::{geometric_grid, measure_profile, EstimatorConfig, QuotientParams};
use crate::norms::{gagliardo_seminorm, weak_lp_quasinorm, SeminormConfig, SeminormDomain};

/// Bound on max/median of a ratio scan.
pub const RATIO_SPREAD_BOUND: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Bessel,
    HomogeneousTl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub grid: SpectralGrid,
    pub estimator: EstimatorConfig,
    /// λ-grid over which the weak-L^p supremum is taken.
    pub lambdas: Vec<f64>,
    pub j_range: (i32, i32),
    pub sharpness: f64,
    pub seminorm: SeminormConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            grid: SpectralGrid::new(1, 16.0, 1024).expect("valid default grid"),
            estimator: EstimatorConfig { ray_samples: 512, ..EstimatorConfig::default() },
            lambdas: geometric_grid(1.0 / 64.0, 2.0, 17),
            j_range: (-5, 5),
            sharpness: 1.0,
            seminorm: SeminormConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub s: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

fn check_admissible(u: &TestFunction, check: FormulaId) -> Result<()> {
    let ok = matches!(u.smoothness(), Smoothness::Smooth | Smoothness::Schwartz | Smoothness::BandLimited);
    if !ok || !u.is_in_lp() {
        return Err(Error::NotAdmissible {
            name: u.name().to_string(),
            check: check.to_string(),
            reason: format!("needs a smooth L^p function, got {:?}", u.smoothness()),
        });
    }
    Ok(())
}

fn check_scan_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.is_empty() || s_grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(invalid("s grid must be nonempty with values in (0, 1)"));
    }
    Ok(())
}

/// s ↦ [T_s u]_{L^{p,∞}} / ‖u‖ with the Bessel-potential norm
/// ‖(I − Δ)^{s/2}u‖_p or the homogeneous F^s_{p,2} norm below.
pub fn embedding_ratio_scan(u: &TestFunction, p: f64, s_grid: &[f64], mode: ScanMode, cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    check_admissible(u, FormulaId::EmbeddingScan)?;
    check_scan_grid(s_grid)?;
    let field = GridField::sample(cfg.grid, u)?;
    let cutoffs = CutoffPair { sharpness: cfg.sharpness };
    s_grid
        .iter()
        .map(|&s| {
            let q = QuotientParams::new(s, p)?;
            let profile = measure_profile(u, &q, &cfg.lambdas, &cfg.estimator)?;
            let numerator = weak_lp_quasinorm(&profile)?;
            let denominator = match mode {
                ScanMode::Bessel => bessel_norm(&field, s, p)?,
                ScanMode::HomogeneousTl => tl_norm(&field, &TLParams::new(s, p, 2.0, true)?, &cutoffs, cfg.j_range)?.value,
            };
            Ok(ScanRow { s, numerator, denominator, ratio: numerator / denominator })
        })
        .collect()
}

/// max(1/2, 1/p).
pub fn fpp_factor_exponent(p: f64) -> f64 {
    (1.0 / p).max(0.5)
}

/// s ↦ |u|_{W^{s,p}} / ([s(1−s)]^{−max(1/2,1/p)}·‖u‖_{Ḟ^s_{p,p}}).
pub fn fpp_ratio_scan(u: &TestFunction, p: f64, s_grid: &[f64], cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    check_admissible(u, FormulaId::FppScan)?;
    check_scan_grid(s_grid)?;
    let field = GridField::sample(cfg.grid, u)?;
    let cutoffs = CutoffPair { sharpness: cfg.sharpness };
    s_grid
        .iter()
        .map(|&s| {
            let numerator = gagliardo_seminorm(u, s, p, &SeminormDomain::AllSpace, &cfg.seminorm)?.value;
            let tl = tl_norm(&field, &TLParams::new(s, p, p, true)?, &cutoffs, cfg.j_range)?.value;
            let denominator = (s * (1.0 - s)).powf(-fpp_factor_exponent(p)) * tl;
            Ok(ScanRow { s, numerator, denominator, ratio: numerator / denominator })
        })
        .collect()
}

/// max/median of the ratios, checked against [`RATIO_SPREAD_BOUND`]; the
/// scan fails outright when a ratio is not finite and positive.
pub fn scan_report(formula_id: FormulaId, rows: &[ScanRow]) -> Result<VerificationReport> {
    if rows.is_empty() {
        return Err(invalid("empty scan"));
    }
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let all_finite = ratios.iter().all(|r| r.is_finite() && *r > 0.0);
    ratios.sort_by(f64::total_cmp);
    let n = ratios.len();
    let median = if n % 2 == 1 { ratios[n / 2] } else { 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]) };
    let spread = if all_finite { ratios[n - 1] / median } else { f64::INFINITY };
    let excess = (spread / RATIO_SPREAD_BOUND - 1.0).max(0.0);
    let mut report = VerificationReport::new(formula_id, spread, RATIO_SPREAD_BOUND, excess, 0.0);
    report.push("min_ratio", ratios[0]);
    report.push("median_ratio", median);
    report.push("max_ratio", ratios[n - 1]);
    report.table = rows.iter().map(|r| Row { x: r.s, value: r.ratio, error: 0.0 }).collect();
    Ok(report)
}

/// sup_{0 < |x| ≤ L/2} |x|^{N+1}|∇K_j(x)| / (1 + |t|)^{N+1} for
/// K_j = F⁻¹[2^{−js}(2π|ξ|)^{s−it}ψ̃(2^{−j}ξ)], gradient taken spectrally.
/// In one dimension the discrete maximum is refined by a parabola through
/// its neighbours.
pub fn kernel_decay_check(j: i32, s: f64, t: f64, grid: &SpectralGrid, cutoffs: &CutoffPair) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) || !t.is_finite() {
        return Err(invalid(format!("need 0 < s < 1 and finite t, got s = {s}, t = {t}")));
    }
    let scale = 2f64.powi(j);
    if 4.0 * scale > grid.nyquist() || 0.25 * scale < grid.frequency_step() {
        let (min, max) = grid.band_range();
        return Err(Error::UnresolvedBand { j, min: min + 2, max: max - 2 });
    }
    let n = grid.dimension;
    let symbol = |xi: &[f64]| {
        let r = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let w = cutoffs.widened(r / scale);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let power = (Complex64::new(s, -t) * (2.0 * PI * r).ln()).exp();
        power * (scale.powf(-s) * w)
    };
    let mut grad_sq = vec![0.0; grid.len()];
    for a in 0..n {
        let d = GridField::from_continuous_spectrum(*grid, |xi| symbol(xi) * Complex64::new(0.0, 2.0 * PI * xi[a]));
        for (g, c) in grad_sq.iter_mut().zip(&d.data) {
            *g += c.norm_sqr();
        }
    }
    let weight = |i: usize| {
        let x = grid.point(i);
        let r = x[..n].iter().map(|c| c * c).sum::<f64>().sqrt();
        if r == 0.0 || r > 0.5 * grid.halfwidth {
            0.0
        } else {
            r.powi(n as i32 + 1) * grad_sq[i].sqrt()
        }
    };
    let vals: Vec<f64> = (0..grid.len()).map(weight).collect();
    let (imax, &vmax) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty grid");
    let mut best = vmax;
    if n == 1 && imax > 0 && imax + 1 < vals.len() {
        let (a, b, c) = (vals[imax - 1], vmax, vals[imax + 1]);
        let curv = a - 2.0 * b + c;
        if curv < 0.0 {
            best = b - 0.125 * (c - a) * (c - a) / curv;
        }
    }
    Ok(best / (1.0 + t.abs()).powi(n as i32 + 1))
}

/// Allowed variation of the normalized kernel sup across t.
pub const KERNEL_ENVELOPE_FACTOR: f64 = 10.0;

/// Runs [`kernel_decay_check`] over j × t. The j-spread (max/min − 1 at
/// fixed t) is held to `tolerance`; the t-factor (max/min over t at fixed j)
/// to [`KERNEL_ENVELOPE_FACTOR`]. rel_error is the larger of the j-spread
/// and the relative excess of the t-factor, so both must hold to pass.
pub fn kernel_decay_report(
    s: f64,
    j_values: &[i32],
    t_values: &[f64],
    grid: &SpectralGrid,
    cutoffs: &CutoffPair,
    tolerance: f64,
) -> Result<VerificationReport> {
    if j_values.is_empty() || t_values.is_empty() {
        return Err(invalid("kernel check needs nonempty j and t lists"));
    }
    let mut values = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let row = j_values.iter().map(|&j| kernel_decay_check(j, s, t, grid, cutoffs)).collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    let spread = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
        (lo, hi)
    };
    let j_spread = values
        .iter()
        .map(|row| {
            let (lo, hi) = spread(&mut row.iter().copied());
            hi / lo - 1.0
        })
        .fold(0.0f64, f64::max);
    let t_factor = (0..j_values.len())
        .map(|k| {
            let (lo, hi) = spread(&mut values.iter().map(|row| row[k]));
            hi / lo
        })
        .fold(1.0f64, f64::max);
    let t_excess = (t_factor / KERNEL_ENVELOPE_FACTOR - 1.0).max(0.0);
    let mut report = VerificationReport::new(FormulaId::KernelDecay, t_factor, KERNEL_ENVELOPE_FACTOR, j_spread.max(t_excess), tolerance);
    report.push("s", s);
    report.push("j_spread", j_spread);
    report.push("t_factor", t_factor);
    report.push("baseline", values[0][0]);
    let pick = j_values.iter().position(|&j| j == 0).unwrap_or(0);
    report.table = t_values
        .iter()
        .zip(&values)
        .map(|(&t, row)| {
            let (lo, hi) = spread(&mut row.iter().copied());
            Row { x: t, value: row[pick], error: hi - lo }
        })
        .collect();
    Ok(report)
}

/// Density errors for each J with δ = 2^{−J}/8. Passes when the error at the
/// largest J is within `tolerance` (absolute) and the errors do not grow
/// with J beyond round-off.
pub fn density_report(
    u: &GridField,
    big_js: &[u32],
    params: &TLParams,
    cutoffs: &CutoffPair,
    tolerance: f64,
) -> Result<VerificationReport> {
    if big_js.is_empty() || big_js.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("J values must be nonempty and strictly increasing"));
    }
    let mut table = Vec::with_capacity(big_js.len());
    for &jj in big_js {
        let delta = 2f64.powi(-(jj as i32)) / 8.0;
        let approx = density_approximation(u, jj, delta, params, cutoffs)?;
        table.push(Row { x: jj as f64, value: approx.tl_error, error: 0.0 });
    }
    let last = table.last().expect("nonempty").value;
    let growth = table.windows(2).map(|w| w[1].value - w[0].value).fold(0.0f64, f64::max);
    let monotone = growth <= 1e-12 * (1.0 + table[0].value);
    let rel_error = if monotone { last } else { last.max(tolerance + growth) };
    let mut report = VerificationReport::new(FormulaId::Density, last, 0.0, rel_error, tolerance);
    report.push("s", params.s);
    report.push("p", params.p);
    report.push("q", params.q);
    report.push("monotone", if monotone { 1.0 } else { 0.0 });
    report.table = table;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityApproximation {
    /// u_{J,δ}(x) = φ(δx)·Σ_{|j|≤J} Δ_j u(x).
    pub field: GridField,
    /// ‖u_{J,δ} − u‖ in the homogeneous F^s_{p,q} norm.
    pub tl_error: f64,
}

/// Band truncation to |j| ≤ J followed by the spatial cutoff φ(δx);
/// δ ≤ 2^{−J}/8 is enforced.
pub fn density_approximation(
    u: &GridField,
    big_j: u32,
    delta: f64,
    params: &TLParams,
    cutoffs: &CutoffPair,
) -> Result<DensityApproximation> {
    let limit = 2f64.powi(-(big_j as i32)) / 8.0;
    if !(delta > 0.0 && delta <= limit) {
        return Err(invalid(format!("delta = {delta} must lie in (0, 2^-J/8 = {limit}]")));
    }
    if !params.homogeneous {
        return Err(invalid("the density error is measured in the homogeneous norm"));
    }
    let jj = big_j as i32;
    let truncated = u.apply_multiplier(|xi| {
        let r = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
        Complex64::new((-jj..=jj).map(|j| cutoffs.psi_j(j, r)).sum(), 0.0)
    });
    let n = u.grid.dimension;
    let data = truncated
        .data
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let x = u.grid.point(i);
            let r = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
            c * cutoffs.phi(delta * r)
        })
        .collect();
    let field = GridField { grid: u.grid, data };
    let tl_error = tl_norm(&field.sub(u)?, params, cutoffs, u.grid.band_range())?.value;
    Ok(DensityApproximation { field, tl_error })
}
