//! Weak-L^p profiles, Gagliardo seminorms and the geometric constants.

mod gagliardo;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::asymptotics::{FormulaId, VerificationReport};
use crate::error::{invalid, Result};
use crate::fields::{lp_norm_best, TestFunction};

pub use gagliardo::{gagliardo_seminorm, SeminormConfig, SeminormDomain, SeminormValue};

/// Volume κ_N of the unit ball in R^N.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        n => PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0 + 1.0),
    }
}

/// Surface area of S^{N-1}.
pub fn sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim)
}

/// ∫_{S^{N-1}} |e·ω|^p dω = 2Γ((p+1)/2)π^{(N-1)/2}/Γ((N+p)/2).
pub fn bbm_constant(p: f64, dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * gamma((p + 1.0) / 2.0) * PI.powf((n - 1.0) / 2.0) / gamma((n + p) / 2.0)
}

/// One grid point of a weak-L^p profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub lambda: f64,
    /// λ^p·𝓛^{2N}(E_λ).
    pub scaled_value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToZero,
    ToInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub error: f64,
    pub direction: Direction,
}

/// λ ↦ λ^p·𝓛^{2N}(E_λ) sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakNormProfile {
    pub p: f64,
    pub s: f64,
    pub entries: Vec<ProfileEntry>,
    pub sup_value: f64,
    /// Error bar of the entry attaining the supremum.
    pub sup_error: f64,
    pub limit_estimate: Option<LimitEstimate>,
}

impl WeakNormProfile {
    pub fn new(p: f64, s: f64, entries: Vec<ProfileEntry>) -> Self {
        let (sup_value, sup_error) = entries
            .iter()
            .fold((0.0, 0.0), |acc, e| if e.scaled_value > acc.0 { (e.scaled_value, e.error) } else { acc });
        Self { p, s, entries, sup_value, sup_error, limit_estimate: None }
    }
}

/// (sup_λ λ^p·m(λ))^{1/p} over the grid: a lower approximation of the weak
/// quasi-norm, whose supremum runs over all λ > 0.
pub fn weak_lp_quasinorm(profile: &WeakNormProfile) -> Result<f64> {
    if profile.entries.is_empty() {
        return Err(invalid("weak norm of an empty profile"));
    }
    Ok(profile.sup_value.max(0.0).powf(1.0 / profile.p))
}

/// Relative tolerance of the bound checks on top of the estimator error.
pub const BOUNDS_TOLERANCE: f64 = 0.02;

/// 2κ_N‖u‖_p^p ≤ sup_λ λ^p·m(λ) ≤ 2^{p+1}κ_N‖u‖_p^p.
pub fn check_theorem11_bounds(u: &TestFunction, p: f64, profile: &WeakNormProfile) -> Result<VerificationReport> {
    check_theorem11_bounds_with(u, p, profile, BOUNDS_TOLERANCE)
}

pub fn check_theorem11_bounds_with(u: &TestFunction, p: f64, profile: &WeakNormProfile, rel_tol: f64) -> Result<VerificationReport> {
    if profile.s != 0.0 {
        return Err(invalid("the L^p bounds concern profiles with s = 0"));
    }
    if (profile.p - p).abs() > 0.0 {
        return Err(invalid(format!("profile exponent {} differs from p = {p}", profile.p)));
    }
    let norm = lp_norm_best(u, p)?;
    let power = norm.value.powf(p);
    let power_err = if norm.value > 0.0 { p * power * norm.error / norm.value } else { 0.0 };
    let kappa = unit_ball_volume(u.dimension());
    let lower = 2.0 * kappa * power;
    let upper = 2f64.powf(p + 1.0) * kappa * power;
    let sup = profile.sup_value;
    let scale = if lower > 0.0 { lower } else { 1.0 };
    let violation = (lower - sup).max(sup - upper).max(0.0);
    let err = profile.sup_error + 2f64.powf(p + 1.0) * kappa * power_err;
    let mut report = VerificationReport::new(FormulaId::Bounds, sup, lower, violation / scale, rel_tol + err / scale);
    report.push("lower", lower);
    report.push("upper", upper);
    report.push("lp_norm", norm.value);
    report.push("sup_error", profile.sup_error);
    report.push("grid_min_lambda", profile.entries.first().map_or(0.0, |e| e.lambda));
    report.push("grid_max_lambda", profile.entries.last().map_or(0.0, |e| e.lambda));
    Ok(report)
}
