use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use super::{Decay, Smoothness, TestFunction};
use crate::error::{Error, Result};

/// Names of the built-in entries, in catalog order.
pub const CATALOG_NAMES: [&str; 7] = ["cube_indicator", "gaussian", "ramp", "bump", "bandlimited", "constant_one", "zero"];

/// Carrier frequency of the band-limited wave packet.
const PACKET_FREQUENCY: f64 = 4.0;

type Builder = Arc<dyn Fn(usize) -> Result<TestFunction> + Send + Sync>;

/// Name-addressable function catalog. Built-ins can be extended with
/// [`Catalog::register`].
#[derive(Clone)]
pub struct Catalog {
    builders: BTreeMap<String, Builder>,
    order: Vec<String>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::standard()
    }
}

impl Catalog {
    pub fn standard() -> Self {
        let mut c = Self { builders: BTreeMap::new(), order: Vec::new() };
        c.register("cube_indicator", cube_indicator);
        c.register("gaussian", gaussian);
        c.register("ramp", ramp);
        c.register("bump", bump);
        c.register("bandlimited", bandlimited);
        c.register("constant_one", constant_one);
        c.register("zero", |n| check_dim(n).map(|_| TestFunction::zero(n)));
        c
    }

    /// Adds or replaces an entry. The builder receives the dimension.
    pub fn register<F>(&mut self, name: &str, builder: F)
    where
        F: Fn(usize) -> Result<TestFunction> + Send + Sync + 'static,
    {
        if !self.builders.contains_key(name) {
            self.order.push(name.to_string());
        }
        self.builders.insert(name.to_string(), Arc::new(builder));
    }

    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn contains(&self, name: &str) -> bool {
        self.builders.contains_key(name)
    }

    pub fn get(&self, name: &str, dim: usize) -> Result<TestFunction> {
        let b = self.builders.get(name).ok_or_else(|| Error::UnknownFunction(name.to_string()))?;
        b(dim)
    }

    pub fn all(&self, dim: usize) -> Result<Vec<TestFunction>> {
        self.order.iter().map(|n| self.get(n, dim)).collect()
    }
}

/// The built-in catalog instantiated in dimension N.
pub fn catalog_standard(dim: usize) -> Result<Vec<TestFunction>> {
    check_dim(dim)?;
    Catalog::standard().all(dim)
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

fn sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma(dim as f64 / 2.0)
}

/// 1 on the closed cube [0,1]^N.
fn cube_indicator(dim: usize) -> Result<TestFunction> {
    check_dim(dim)?;
    Ok(TestFunction::new("cube_indicator", dim, 1.0, Smoothness::Indicator, |x| {
        if x.iter().all(|&c| (0.0..=1.0).contains(&c)) {
            1.0
        } else {
            0.0
        }
    })
    .with_support_radius((dim as f64).sqrt())
    .with_bounding_box(vec![(0.0, 1.0); dim])
    .with_axis_breaks(vec![vec![0.0, 1.0]; dim])
    .with_lp_norm(|_| Some(1.0)))
}

/// exp(-π|x|²).
fn gaussian(dim: usize) -> Result<TestFunction> {
    check_dim(dim)?;
    let n = dim as f64;
    let area = sphere_area(dim);
    Ok(TestFunction::new("gaussian", dim, 1.0, Smoothness::Schwartz, |x| (-PI * norm2(x)).exp())
        .with_gradient(|x, g| {
            let e = (-PI * norm2(x)).exp();
            for (gi, xi) in g.iter_mut().zip(x) {
                *gi = -2.0 * PI * xi * e;
            }
        })
        .with_lp_norm(move |p| Some(p.powf(-n / (2.0 * p))))
        .with_gradient_lp_norm(move |p| {
            // (2π)^p ∫|x|^p e^{-pπ|x|²} dx in polar coordinates
            let power = (2.0 * PI).powf(p) * area * gamma((n + p) / 2.0) / (2.0 * (p * PI).powf((n + p) / 2.0));
            Some(power.powf(1.0 / p))
        })
        .with_decay(Decay { amplitude: 1.0, rate: PI, offset: 0.0 }))
}

/// x₁ on (0,1)^N, zero elsewhere.
fn ramp(dim: usize) -> Result<TestFunction> {
    check_dim(dim)?;
    Ok(TestFunction::new("ramp", dim, 1.0, Smoothness::Lipschitz, |x| {
        if x.iter().all(|&c| c > 0.0 && c < 1.0) {
            x[0]
        } else {
            0.0
        }
    })
    .with_support_radius((dim as f64).sqrt())
    .with_bounding_box(vec![(0.0, 1.0); dim])
    .with_natural_domain(vec![(0.0, 1.0); dim])
    .with_axis_breaks(vec![vec![0.0, 1.0]; dim])
    .with_gradient(|x, g| {
        g.iter_mut().for_each(|c| *c = 0.0);
        if x.iter().all(|&c| c > 0.0 && c < 1.0) {
            g[0] = 1.0;
        }
    })
    .with_lp_norm(|p| Some((1.0 / (p + 1.0)).powf(1.0 / p)))
    .with_gradient_lp_norm(|_| Some(1.0)))
}

/// exp(1 - 1/(1 - |x|²)) on the unit ball.
fn bump(dim: usize) -> Result<TestFunction> {
    check_dim(dim)?;
    Ok(TestFunction::new("bump", dim, 1.0, Smoothness::Smooth, |x| {
        let r2 = norm2(x);
        if r2 < 1.0 {
            (1.0 - 1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
    .with_support_radius(1.0)
    .with_bounding_box(vec![(-1.0, 1.0); dim])
    .with_gradient(|x, g| {
        let r2 = norm2(x);
        if r2 < 1.0 {
            let d = 1.0 - r2;
            let u = (1.0 - 1.0 / d).exp();
            for (gi, xi) in g.iter_mut().zip(x) {
                *gi = -2.0 * xi * u / (d * d);
            }
        } else {
            g.iter_mut().for_each(|c| *c = 0.0);
        }
    }))
}

/// Gaussian wave packet exp(-π|x|²)·cos(2π ξ₀ x₁): its spectrum is two
/// Gaussians centred at ±ξ₀e₁, below 1e-21 of its peak at ξ = 0.
fn bandlimited(dim: usize) -> Result<TestFunction> {
    check_dim(dim)?;
    let n = dim as f64;
    let w = 2.0 * PI * PACKET_FREQUENCY;
    // ∫ e^{-2π|x|²} cos(2w x₁) dx relative to ∫ e^{-2π|x|²} dx
    let e = (-(2.0 * w).powi(2) / (8.0 * PI)).exp();
    let c = 2f64.powf(-0.5);
    let a = 2.0 * PI;
    let k = 2.0 * w;
    Ok(TestFunction::new("bandlimited", dim, 1.0, Smoothness::BandLimited, move |x| {
        (-PI * norm2(x)).exp() * (w * x[0]).cos()
    })
    .with_gradient(move |x, g| {
        let env = (-PI * norm2(x)).exp();
        let (s, co) = (w * x[0]).sin_cos();
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi = -2.0 * PI * xi * env * co;
        }
        g[0] -= w * env * s;
    })
    .with_lp_norm(move |p| (p == 2.0).then(|| (0.5 * c.powf(n) * (1.0 + e)).sqrt()))
    .with_gradient_lp_norm(move |p| {
        if p != 2.0 {
            return None;
        }
        // axis 1: e^{-ax²}[(2πx cos wx + w sin wx)²] integrated term by term
        let x2 = c / (2.0 * a);
        let x2_cos = c * e * (1.0 / (2.0 * a) - k * k / (4.0 * a * a));
        let x_sin = c * e * k / (2.0 * a);
        let first = 2.0 * PI * PI * (x2 + x2_cos) + 2.0 * PI * w * x_sin + 0.5 * w * w * c * (1.0 - e);
        let cos2 = 0.5 * c * (1.0 + e);
        // axes i >= 2 contribute 4π² x_i² e^{-a|x|²} cos²(w x₁)
        let others = if dim >= 2 { (n - 1.0) * 4.0 * PI * PI * x2 * cos2 * c.powf(n - 2.0) } else { 0.0 };
        let total = first * c.powf(n - 1.0) + others;
        Some(total.sqrt())
    })
    .with_decay(Decay { amplitude: 1.0, rate: PI, offset: 0.0 }))
}

/// u ≡ 1, which lies in no L^p with p < ∞.
fn constant_one(dim: usize) -> Result<TestFunction> {
    check_dim(dim)?;
    Ok(TestFunction::new("constant_one", dim, 1.0, Smoothness::Smooth, |_| 1.0)
        .with_gradient(|_, g| g.iter_mut().for_each(|c| *c = 0.0))
        .with_gradient_lp_norm(|_| Some(0.0))
        .not_in_lp())
}
