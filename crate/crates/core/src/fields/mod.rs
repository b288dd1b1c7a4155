//! Test functions u: R^N -> R with optional closed-form oracles, plus the
//! L^p quadrature and ball truncation shared by every other module.

mod catalog;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Integral};

pub use catalog::{catalog_standard, Catalog, CATALOG_NAMES};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type NormOracle = Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>;

/// Regularity class of a catalog function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Indicator,
    Lipschitz,
    Smooth,
    Schwartz,
    BandLimited,
}

impl Smoothness {
    /// Smooth enough for the gradient (large-λ) formula.
    pub fn is_smooth(self) -> bool {
        matches!(self, Smoothness::Smooth | Smoothness::Schwartz | Smoothness::BandLimited)
    }
}

/// Radial envelope |u(x)| <= amplitude * exp(-rate * max(|x| - offset, 0)^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub amplitude: f64,
    pub rate: f64,
    pub offset: f64,
}

impl Decay {
    pub fn envelope(&self, r: f64) -> f64 {
        let t = (r - self.offset).max(0.0);
        self.amplitude * (-self.rate * t * t).exp()
    }

    /// Smallest radius beyond which the envelope is at most `level`.
    pub fn radius_below(&self, level: f64) -> f64 {
        if level >= self.amplitude {
            return self.offset;
        }
        self.offset + ((self.amplitude / level).ln() / self.rate).sqrt()
    }
}

/// A function on R^N together with whatever closed-form facts are known about it.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    dim: usize,
    eval: ScalarFn,
    gradient: Option<GradientFn>,
    support_radius: Option<f64>,
    bounding_box: Option<Vec<(f64, f64)>>,
    natural_domain: Option<Vec<(f64, f64)>>,
    axis_breaks: Vec<Vec<f64>>,
    lp_oracle: Option<NormOracle>,
    grad_lp_oracle: Option<NormOracle>,
    smoothness: Smoothness,
    sup_norm: f64,
    decay: Option<Decay>,
    in_lp: bool,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("support_radius", &self.support_radius)
            .field("smoothness", &self.smoothness)
            .field("sup_norm", &self.sup_norm)
            .field("in_lp", &self.in_lp)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    /// A function with no declared properties beyond its values and sup norm.
    pub fn new<F>(name: impl Into<String>, dim: usize, sup_norm: f64, smoothness: Smoothness, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            gradient: None,
            support_radius: None,
            bounding_box: None,
            natural_domain: None,
            axis_breaks: vec![Vec::new(); dim],
            lp_oracle: None,
            grad_lp_oracle: None,
            smoothness,
            sup_norm,
            decay: None,
            in_lp: true,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new("zero", dim, 0.0, Smoothness::BandLimited, |_| 0.0)
            .with_support_radius(1.0)
            .with_bounding_box(vec![(-1.0, 1.0); dim])
            .with_lp_norm(|_| Some(0.0))
            .with_gradient(|_, g| g.iter_mut().for_each(|c| *c = 0.0))
            .with_gradient_lp_norm(|_| Some(0.0))
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_support_radius(mut self, r: f64) -> Self {
        self.support_radius = Some(r);
        self
    }

    /// Axis-aligned box containing the support (tighter than the ball).
    pub fn with_bounding_box(mut self, bbox: Vec<(f64, f64)>) -> Self {
        self.bounding_box = Some(bbox);
        self
    }

    /// Box on which the function is regular; it may jump across its faces.
    pub fn with_natural_domain(mut self, domain: Vec<(f64, f64)>) -> Self {
        self.natural_domain = Some(domain);
        self
    }

    /// Coordinates, per axis, of hyperplanes across which u is not smooth.
    pub fn with_axis_breaks(mut self, breaks: Vec<Vec<f64>>) -> Self {
        self.axis_breaks = breaks;
        self
    }

    pub fn with_lp_norm<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> Option<f64> + Send + Sync + 'static,
    {
        self.lp_oracle = Some(Arc::new(f));
        self
    }

    pub fn with_gradient_lp_norm<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> Option<f64> + Send + Sync + 'static,
    {
        self.grad_lp_oracle = Some(Arc::new(f));
        self
    }

    pub fn with_decay(mut self, decay: Decay) -> Self {
        self.decay = Some(decay);
        self
    }

    /// Marks the function as outside every L^p, p < ∞.
    pub fn not_in_lp(mut self) -> Self {
        self.in_lp = false;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| {
            let mut out = vec![0.0; self.dim];
            g(x, &mut out);
            out
        })
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    pub fn bounding_box(&self) -> Option<&[(f64, f64)]> {
        self.bounding_box.as_deref()
    }

    pub fn natural_domain(&self) -> Option<&[(f64, f64)]> {
        self.natural_domain.as_deref()
    }

    pub fn axis_breaks(&self) -> &[Vec<f64>] {
        &self.axis_breaks
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn decay(&self) -> Option<Decay> {
        self.decay
    }

    pub fn is_in_lp(&self) -> bool {
        self.in_lp
    }

    /// True when u jumps somewhere on R^N.
    pub fn has_jumps(&self) -> bool {
        self.smoothness == Smoothness::Indicator || self.natural_domain.is_some()
    }

    pub fn analytic_lp_norm(&self, p: f64) -> Option<f64> {
        self.lp_oracle.as_ref().and_then(|f| f(p))
    }

    pub fn analytic_gradient_lp_norm(&self, p: f64) -> Option<f64> {
        self.grad_lp_oracle.as_ref().and_then(|f| f(p))
    }

    /// Radial envelope of |u| outside radius r: the support radius gives an
    /// exact zero, a declared decay gives its bound, otherwise the sup norm.
    pub fn envelope(&self, r: f64) -> f64 {
        if let Some(big_r) = self.support_radius {
            if r > big_r {
                return 0.0;
            }
        }
        match self.decay {
            Some(d) => d.envelope(r).min(self.sup_norm),
            None => self.sup_norm,
        }
    }

    /// c·u.
    pub fn scaled(&self, c: f64) -> Self {
        let base = self.clone();
        let f = base.eval.clone();
        let mut out = base.clone();
        out.name = format!("{}*{}", c, base.name);
        out.eval = Arc::new(move |x| c * f(x));
        out.gradient = base.gradient.clone().map(|g| -> GradientFn {
            Arc::new(move |x, out: &mut [f64]| {
                g(x, out);
                out.iter_mut().for_each(|v| *v *= c);
            })
        });
        out.lp_oracle = base.lp_oracle.clone().map(|o| -> NormOracle { Arc::new(move |p| o(p).map(|v| c.abs() * v)) });
        out.grad_lp_oracle = base
            .grad_lp_oracle
            .clone()
            .map(|o| -> NormOracle { Arc::new(move |p| o(p).map(|v| c.abs() * v)) });
        out.sup_norm = c.abs() * base.sup_norm;
        out.decay = base.decay.map(|d| Decay { amplitude: c.abs() * d.amplitude, ..d });
        if c == 0.0 {
            out.in_lp = true;
        }
        out
    }

    /// x ↦ u(x - shift).
    pub fn translated(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.dim);
        let base = self.clone();
        let v: Vec<f64> = shift.to_vec();
        let norm_v = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let f = base.eval.clone();
        let mut out = base.clone();
        out.name = format!("{}@shift", base.name);
        let v1 = v.clone();
        out.eval = Arc::new(move |x| {
            let y: Vec<f64> = x.iter().zip(&v1).map(|(a, b)| a - b).collect();
            f(&y)
        });
        out.gradient = base.gradient.clone().map(|g| -> GradientFn {
            let v2 = v.clone();
            Arc::new(move |x, out: &mut [f64]| {
                let y: Vec<f64> = x.iter().zip(&v2).map(|(a, b)| a - b).collect();
                g(&y, out)
            })
        });
        out.support_radius = base.support_radius.map(|r| r + norm_v);
        out.bounding_box = base
            .bounding_box
            .as_ref()
            .map(|b| b.iter().zip(&v).map(|(&(lo, hi), s)| (lo + s, hi + s)).collect());
        out.natural_domain = base
            .natural_domain
            .as_ref()
            .map(|b| b.iter().zip(&v).map(|(&(lo, hi), s)| (lo + s, hi + s)).collect());
        out.axis_breaks = base
            .axis_breaks
            .iter()
            .zip(&v)
            .map(|(br, s)| br.iter().map(|t| t + s).collect())
            .collect();
        out.decay = base.decay.map(|d| Decay { offset: d.offset + norm_v, ..d });
        out
    }

    /// x ↦ u(x / r), r > 0.
    pub fn dilated(&self, r: f64) -> Self {
        assert!(r > 0.0);
        let base = self.clone();
        let n = self.dim as f64;
        let f = base.eval.clone();
        let mut out = base.clone();
        out.name = format!("{}(x/{})", base.name, r);
        out.eval = Arc::new(move |x| {
            let y: Vec<f64> = x.iter().map(|a| a / r).collect();
            f(&y)
        });
        out.gradient = base.gradient.clone().map(|g| -> GradientFn {
            Arc::new(move |x, out: &mut [f64]| {
                let y: Vec<f64> = x.iter().map(|a| a / r).collect();
                g(&y, out);
                out.iter_mut().for_each(|v| *v /= r);
            })
        });
        out.lp_oracle = base
            .lp_oracle
            .clone()
            .map(|o| -> NormOracle { Arc::new(move |p| o(p).map(|v| v * r.powf(n / p))) });
        out.grad_lp_oracle = base
            .grad_lp_oracle
            .clone()
            .map(|o| -> NormOracle { Arc::new(move |p| o(p).map(|v| v * r.powf(n / p - 1.0))) });
        out.support_radius = base.support_radius.map(|s| s * r);
        out.bounding_box = base.bounding_box.as_ref().map(|b| b.iter().map(|&(lo, hi)| (lo * r, hi * r)).collect());
        out.natural_domain = base
            .natural_domain
            .as_ref()
            .map(|b| b.iter().map(|&(lo, hi)| (lo * r, hi * r)).collect());
        out.axis_breaks = base.axis_breaks.iter().map(|br| br.iter().map(|t| t * r).collect()).collect();
        out.decay = base.decay.map(|d| Decay { rate: d.rate / (r * r), offset: d.offset * r, ..d });
        out
    }

    /// Box outside of which ∫|u|^p is below `tail` (exactly zero for compact support).
    pub fn integration_box(&self, p: f64, tail: f64) -> Result<Vec<(f64, f64)>> {
        if let Some(b) = &self.bounding_box {
            return Ok(b.clone());
        }
        if let Some(r) = self.support_radius {
            return Ok(vec![(-r, r); self.dim]);
        }
        if !self.in_lp {
            return Err(self.not_in_lp_error());
        }
        let decay = self.decay.ok_or_else(|| Error::Quadrature(format!(
            "{} has neither compact support nor a declared decay; no integration box",
            self.name
        )))?;
        let mut l = decay.radius_below(1e-3 * decay.amplitude).max(1.0);
        while decay_tail_bound(&decay, self.dim, p, l) > tail {
            l += 0.25;
        }
        Ok(vec![(-l, l); self.dim])
    }

    pub fn not_in_lp_error(&self) -> Error {
        Error::NotInLp {
            name: self.name.clone(),
            reason: "u does not decay (e.g. u ≡ 1 gives an empty level set while ||u||_p = ∞)".into(),
        }
    }
}

/// ∫_{|x| > L} envelope(|x|)^p dx for a Gaussian-type envelope.
pub fn decay_tail_bound(decay: &Decay, dim: usize, p: f64, l: f64) -> f64 {
    let area = crate::norms::sphere_area(dim);
    let width = (40.0 / (p * decay.rate)).sqrt() + 1.0;
    let f = |r: f64| area * r.powi(dim as i32 - 1) * decay.envelope(r).powf(p);
    // the integrand is at most e^{-40} beyond l + width
    quad::composite_nodes(l, l + width, &[], 0.25, 16)
        .iter()
        .map(|&(r, w)| w * f(r))
        .sum()
}

/// How ‖u‖_p should be obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Analytic,
    Quadrature,
}

/// A norm value and its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub error: f64,
}

const NORM_REL_TOL: f64 = 1e-11;

/// ‖u‖_{L^p(R^N)}.
pub fn lp_norm(u: &TestFunction, p: f64, method: NormMethod) -> Result<NormValue> {
    check_exponent(p)?;
    if !u.in_lp {
        return Err(u.not_in_lp_error());
    }
    match method {
        NormMethod::Analytic => u
            .analytic_lp_norm(p)
            .map(|value| NormValue { value, error: 0.0 })
            .ok_or_else(|| Error::MissingOracle { name: u.name.clone(), what: format!("L^{p} norm") }),
        NormMethod::Quadrature => {
            let integral = lp_power_integral(u, p)?;
            Ok(power_to_norm(integral, p))
        }
    }
}

/// ‖u‖_p^p by quadrature.
pub fn lp_power_integral(u: &TestFunction, p: f64) -> Result<Integral> {
    if !u.in_lp {
        return Err(u.not_in_lp_error());
    }
    let bx = u.integration_box(p, 1e-14)?;
    let mut breaks = u.axis_breaks.clone();
    if let Some(r) = u.support_radius {
        if u.dim == 1 {
            breaks[0].extend([-r, r]);
        }
    }
    let mut integral = integrate_box(&|x| u.evaluate(x).abs().powf(p), &bx, &breaks, NORM_REL_TOL)?;
    if u.support_radius.is_none() && u.bounding_box.is_none() {
        if let Some(d) = u.decay {
            let l = bx.iter().map(|b| b.1.abs().min(b.0.abs())).fold(f64::INFINITY, f64::min);
            integral.error += decay_tail_bound(&d, u.dim, p, l);
        }
    }
    Ok(integral)
}

/// ‖∇u‖_p: analytic oracle when present, otherwise quadrature of the gradient rule.
pub fn gradient_lp_norm(u: &TestFunction, p: f64, method: NormMethod) -> Result<NormValue> {
    check_exponent(p)?;
    match method {
        NormMethod::Analytic => u
            .analytic_gradient_lp_norm(p)
            .map(|value| NormValue { value, error: 0.0 })
            .ok_or_else(|| Error::MissingOracle { name: u.name.clone(), what: format!("gradient L^{p} norm") }),
        NormMethod::Quadrature => {
            let g = u
                .gradient
                .clone()
                .ok_or_else(|| Error::MissingOracle { name: u.name.clone(), what: "gradient rule".into() })?;
            let bx = match &u.natural_domain {
                Some(d) => d.clone(),
                None => u.integration_box(p, 1e-14)?,
            };
            let dim = u.dim;
            let f = move |x: &[f64]| {
                let mut v = vec![0.0; dim];
                g(x, &mut v);
                v.iter().map(|c| c * c).sum::<f64>().sqrt().powf(p)
            };
            let integral = integrate_box(&f, &bx, &u.axis_breaks, NORM_REL_TOL)?;
            Ok(power_to_norm(integral, p))
        }
    }
}

/// Best available ‖u‖_p: the oracle if present, else quadrature.
pub fn lp_norm_best(u: &TestFunction, p: f64) -> Result<NormValue> {
    match lp_norm(u, p, NormMethod::Analytic) {
        Ok(v) => Ok(v),
        Err(Error::MissingOracle { .. }) => lp_norm(u, p, NormMethod::Quadrature),
        Err(e) => Err(e),
    }
}

/// Best available ‖∇u‖_p.
pub fn gradient_lp_norm_best(u: &TestFunction, p: f64) -> Result<NormValue> {
    match gradient_lp_norm(u, p, NormMethod::Analytic) {
        Ok(v) => Ok(v),
        Err(Error::MissingOracle { .. }) => gradient_lp_norm(u, p, NormMethod::Quadrature),
        Err(e) => Err(e),
    }
}

fn power_to_norm(integral: Integral, p: f64) -> NormValue {
    let v = integral.value.max(0.0);
    let value = v.powf(1.0 / p);
    let error = if v > 0.0 { value * integral.error / (p * v) } else { integral.error.powf(1.0 / p) };
    NormValue { value, error: error.max(f64::EPSILON * value) }
}

pub fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(crate::error::invalid(format!("exponent p = {p} must satisfy 1 <= p < ∞")));
    }
    Ok(())
}

/// Nested adaptive Gauss-Legendre over a box, one axis at a time.
/// Inner integrals get an absolute floor derived from a coarse tensor
/// estimate of the whole integral, so sections where `f` is negligible
/// terminate.
pub fn integrate_box(f: &dyn Fn(&[f64]) -> f64, bx: &[(f64, f64)], breaks: &[Vec<f64>], rel_tol: f64) -> Result<Integral> {
    let empty = Vec::new();
    let axes: Vec<Vec<(f64, f64)>> = bx
        .iter()
        .enumerate()
        .map(|(k, &(lo, hi))| quad::composite_nodes(lo, hi, breaks.get(k).unwrap_or(&empty), (hi - lo) / 4.0, 10))
        .collect();
    let scale: f64 = quad::tensor_nodes(&axes).iter().map(|(x, w)| w * f(x).abs()).sum();
    let mut prefix = Vec::with_capacity(bx.len());
    integrate_axis(f, bx, breaks, rel_tol, (1e-3 * rel_tol * scale).max(1e-300), &mut prefix)
}

fn integrate_axis(
    f: &dyn Fn(&[f64]) -> f64,
    bx: &[(f64, f64)],
    breaks: &[Vec<f64>],
    rel_tol: f64,
    abs_tol: f64,
    prefix: &mut Vec<f64>,
) -> Result<Integral> {
    let k = prefix.len();
    let (lo, hi) = bx[k];
    let empty = Vec::new();
    let br = breaks.get(k).unwrap_or(&empty);
    if k + 1 == bx.len() {
        let mut g = |t: f64| {
            prefix.push(t);
            let v = f(prefix);
            prefix.pop();
            v
        };
        return quad::adaptive_split(&mut g, lo, hi, br, abs_tol, rel_tol);
    }
    let inner_tol = abs_tol / (hi - lo);
    let mut inner_err = 0.0;
    let mut inner_count = 0usize;
    let mut failure = None;
    let outer = {
        let mut g = |t: f64| {
            prefix.push(t);
            let r = integrate_axis(f, bx, breaks, rel_tol, inner_tol, prefix);
            prefix.pop();
            match r {
                Ok(i) => {
                    inner_err += i.error;
                    inner_count += 1;
                    i.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        };
        quad::adaptive_split(&mut g, lo, hi, br, abs_tol, rel_tol)?
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let mean_inner = if inner_count > 0 { inner_err / inner_count as f64 } else { 0.0 };
    Ok(Integral { value: outer.value, error: outer.error + mean_inner * (hi - lo) })
}

/// u = u_R + v_R with u_R = u·1_{|x| <= R}.
#[derive(Clone, Debug)]
pub struct TruncationPair {
    pub inner: TestFunction,
    pub outer: TestFunction,
    pub radius: f64,
}

/// Splits u at radius R into the compactly supported part and the remainder.
pub fn truncate(u: &TestFunction, radius: f64) -> Result<TruncationPair> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(crate::error::invalid(format!("truncation radius {radius} must be positive")));
    }
    let f_in = u.eval.clone();
    let f_out = u.eval.clone();
    let r2 = radius * radius;
    let inside = move |x: &[f64]| x.iter().map(|c| c * c).sum::<f64>() <= r2;
    let mut inner = u.clone();
    inner.name = format!("{}_R{}", u.name, radius);
    inner.eval = Arc::new(move |x| if inside(x) { f_in(x) } else { 0.0 });
    inner.support_radius = Some(u.support_radius.map_or(radius, |r| r.min(radius)));
    inner.bounding_box = Some(match &u.bounding_box {
        Some(b) => b.iter().map(|&(lo, hi)| (lo.max(-radius), hi.min(radius))).collect(),
        None => vec![(-radius, radius); u.dim],
    });
    inner.decay = None;
    inner.lp_oracle = None;
    inner.grad_lp_oracle = None;
    inner.gradient = None;
    inner.in_lp = true;
    let mut outer = u.clone();
    outer.name = format!("{}_tail{}", u.name, radius);
    outer.eval = Arc::new(move |x| if inside(x) { 0.0 } else { f_out(x) });
    outer.lp_oracle = None;
    outer.grad_lp_oracle = None;
    outer.gradient = None;
    let trivial_outer = u.support_radius.is_some_and(|r| r <= radius)
        || u.bounding_box.as_ref().is_some_and(|b| b.iter().map(|&(lo, hi)| lo.abs().max(hi.abs()).powi(2)).sum::<f64>() <= radius * radius);
    if trivial_outer {
        outer.eval = Arc::new(|_| 0.0);
        outer.lp_oracle = Some(Arc::new(|_| Some(0.0)));
    }
    if u.smoothness != Smoothness::Indicator {
        inner.smoothness = Smoothness::Indicator;
        outer.smoothness = Smoothness::Indicator;
    }
    if u.dim == 1 {
        inner.axis_breaks[0].extend([-radius, radius]);
        outer.axis_breaks[0].extend([-radius, radius]);
    }
    Ok(TruncationPair { inner, outer, radius })
}
