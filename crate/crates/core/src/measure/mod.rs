//! Lebesgue measure of difference-quotient superlevel sets
//! E_λ = {(x, y) : |u(x) − u(y)| ≥ λ|x − y|^{N/p+s}} ⊂ R^N × R^N.
//!
//! Pairs are split by a box K that contains the support of u (or, for
//! decaying u, outside of which |u| ≤ ε). Pairs with both points in K are
//! integrated numerically over {|y| > |x|} and doubled. For x ∈ K, y ∉ K the
//! condition reduces to |x − y| ≤ (|u(x)|/λ)^{1/α}, which is integrated
//! exactly along rays. Anything not computed is reported in `tail_bound`.

mod engine;
mod sphere;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::TestFunction;
use crate::norms::{ProfileEntry, WeakNormProfile};

pub use sphere::sphere_integral;

/// Exponent data of the quotient (u(x) − u(y)) / |x − y|^{N/p + s}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientParams {
    pub s: f64,
    pub p: f64,
}

impl QuotientParams {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        let q = Self { s, p };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.s) {
            return Err(invalid(format!("s = {} must lie in [0, 1]", self.s)));
        }
        crate::fields::check_exponent(self.p)
    }

    /// N/p + s.
    pub fn exponent(&self, dim: usize) -> f64 {
        dim as f64 / self.p + self.s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Midpoint rule on a uniform grid of K × K.
    TensorQuadrature,
    /// Monte Carlo with the x-cube of K stratified.
    StratifiedMc,
    /// Gauss rule in x, exact root bracketing along rays from x in y.
    RadialSections,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    pub method: Method,
    /// Half-width of the box used for functions without compact support.
    pub box_halfwidth: Option<f64>,
    /// Nodes per axis (quadrature) or samples per stratum (Monte Carlo).
    pub samples_or_nodes: usize,
    pub rng_seed: u64,
    pub strata_per_axis: usize,
    /// Angular resolution of the ray rules for N ≥ 2.
    pub directions: usize,
    /// Samples per ray before root refinement.
    pub ray_samples: usize,
    /// Integrate over {|y| > |x|} and double.
    pub symmetric: bool,
    /// Allow functions flagged as outside L^p (their measure is only
    /// computed inside the box and `tail_bound` is infinite).
    pub permit_non_lp: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            method: Method::RadialSections,
            box_halfwidth: None,
            samples_or_nodes: 1024,
            rng_seed: 0,
            strata_per_axis: 8,
            directions: 64,
            ray_samples: 64,
            symmetric: true,
            permit_non_lp: false,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if self.method == Method::TensorQuadrature && 2 * dim > 4 {
            return Err(invalid(format!("tensor_quadrature needs 2N <= 4, got N = {dim}")));
        }
        if self.samples_or_nodes == 0 || self.strata_per_axis == 0 || self.directions < 4 || self.ray_samples < 4 {
            return Err(invalid("estimator resolutions must be positive (directions, ray_samples >= 4)"));
        }
        if let Some(l) = self.box_halfwidth {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid(format!("box_halfwidth {l} must be positive")));
            }
        }
        Ok(())
    }
}

/// Estimate of 𝓛^{2N}(E_λ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub lambda: f64,
    pub measure: f64,
    /// Monte Carlo standard error; zero for deterministic rules.
    pub std_error: f64,
    /// Bound on measure not captured: pairs outside the box, the excluded
    /// diagonal strip, the |u| ≤ ε sandwich and the x-quadrature error.
    pub tail_bound: f64,
    pub method: Method,
}

impl MeasureEstimate {
    /// Error bar used when comparing against references: 2σ plus the tail.
    pub fn error(&self) -> f64 {
        2.0 * self.std_error + self.tail_bound
    }
}

/// (u(x) − u(y)) / |x − y|^{N/p + s}.
pub fn difference_quotient(u: &TestFunction, q: &QuotientParams, x: &[f64], y: &[f64]) -> Result<f64> {
    let n = u.dimension();
    for pt in [x, y] {
        if pt.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: pt.len() });
        }
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if d2 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok((u.evaluate(x) - u.evaluate(y)) / d2.sqrt().powf(q.exponent(n)))
}

/// 𝓛^{2N}{(x, y) : x ≠ y, |u(x) − u(y)| ≥ λ|x − y|^{N/p+s}}.
pub fn level_set_measure(u: &TestFunction, q: &QuotientParams, lambda: f64, cfg: &EstimatorConfig) -> Result<MeasureEstimate> {
    q.validate()?;
    cfg.validate(u.dimension())?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda = {lambda} must be positive")));
    }
    if u.sup_norm() == 0.0 {
        return Ok(MeasureEstimate { lambda, measure: 0.0, std_error: 0.0, tail_bound: 0.0, method: cfg.method });
    }
    engine::estimate(u, q, lambda, cfg)
}

/// λ ↦ λ^p·𝓛^{2N}(E_λ) over a strictly increasing positive grid.
pub fn measure_profile(u: &TestFunction, q: &QuotientParams, lambdas: &[f64], cfg: &EstimatorConfig) -> Result<WeakNormProfile> {
    if lambdas.is_empty() {
        return Err(invalid("empty lambda grid"));
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("lambda grid must be positive and strictly increasing"));
    }
    let mut entries = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let m = level_set_measure(u, q, lambda, cfg)?;
        let scale = lambda.powf(q.p);
        entries.push(ProfileEntry { lambda, scaled_value: scale * m.measure, error: scale * m.error() });
    }
    Ok(WeakNormProfile::new(q.p, q.s, entries))
}

/// Geometric grid `start, start·ratio, …` with `count` points.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}
