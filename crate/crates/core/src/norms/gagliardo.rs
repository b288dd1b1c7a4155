//! Gagliardo seminorm in relative coordinates:
//!
//!   |u|^p = ∫_{S^{N−1}} ∫_0^∞ r^{−1−sp} D(rω) dr dω,
//!   D(h) = ∫ |u(x + h) − u(x)|^p dx.
//!
//! The radial integral runs on a dyadic mesh from the scale of the domain
//! down to 10⁻⁶ of it. Below that D(h) ≈ c|h|^γ (γ = 1 with jumps, γ = p
//! otherwise) is integrated in closed form; beyond the separation radius of
//! a compact support D = 2‖u‖_p^p exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{lp_norm_best, Smoothness, TestFunction};
use crate::quad;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeminormDomain {
    AllSpace,
    /// Product of intervals Ω = Π (a_i, b_i).
    Box(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeminormConfig {
    /// Angular resolution for N ≥ 2.
    pub directions: usize,
    /// Gauss panels per unit length for the x-integral of D(h).
    pub panels_per_unit: f64,
    /// Smallest |h| of the mesh relative to the outer radius.
    pub min_radius_fraction: f64,
}

impl Default for SeminormConfig {
    fn default() -> Self {
        Self { directions: 32, panels_per_unit: 8.0, min_radius_fraction: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormValue {
    /// |u|_{W^{s,p}}.
    pub value: f64,
    pub error: f64,
    /// |u|^p_{W^{s,p}}.
    pub power: f64,
    pub power_error: f64,
}

const RADIAL_ORDER: usize = 8;
const CHECK_ORDER: usize = 5;
const INNER_ORDER: usize = 8;

struct Setup<'a> {
    u: &'a TestFunction,
    dim: usize,
    p: f64,
    sp: f64,
    /// Box containing the support (all space) or Ω itself.
    region: Vec<(f64, f64)>,
    restrict: bool,
    breaks: Vec<Vec<f64>>,
    gamma: f64,
    /// 2‖u‖_p^p, the value of D beyond separation (all space only).
    far_value: f64,
    compact: bool,
    panels_per_unit: f64,
}

/// (∬ |u(x) − u(y)|^p / |x − y|^{N+sp} dx dy)^{1/p} over the domain.
pub fn gagliardo_seminorm(u: &TestFunction, s: f64, p: f64, domain: &SeminormDomain, cfg: &SeminormConfig) -> Result<SeminormValue> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("s = {s} must lie in (0, 1)")));
    }
    crate::fields::check_exponent(p)?;
    let dim = u.dimension();
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let sp = s * p;
    let setup = Setup::new(u, p, sp, domain, cfg)?;
    if setup.gamma <= sp {
        return Err(Error::Singularity(format!(
            "D(h) ~ |h|^{} does not beat |h|^{sp}: the seminorm diverges for s = {s}, p = {p}",
            setup.gamma
        )));
    }
    let dirs = quad::sphere_rule(dim, cfg.directions)?;
    let parts: Vec<Result<(f64, f64)>> = dirs.par_iter().map(|(w, wt)| setup.along(w, cfg).map(|(v, e)| (wt * v, wt * e))).collect();
    let mut power = 0.0;
    let mut err = 0.0;
    for part in parts {
        let (v, e) = part?;
        power += v;
        err += e;
    }
    let power = power.max(0.0);
    let value = power.powf(1.0 / p);
    let error = if power > 0.0 { value * err / (p * power) } else { err.powf(1.0 / p) };
    Ok(SeminormValue { value, error, power, power_error: err })
}

impl<'a> Setup<'a> {
    fn new(u: &'a TestFunction, p: f64, sp: f64, domain: &SeminormDomain, cfg: &SeminormConfig) -> Result<Self> {
        let dim = u.dimension();
        let (region, restrict, gamma, far_value, compact) = match domain {
            SeminormDomain::Box(omega) => {
                if omega.len() != dim || omega.iter().any(|&(a, b)| !(b > a)) {
                    return Err(invalid("domain box must have N nonempty intervals"));
                }
                let gamma = if u.smoothness() == Smoothness::Indicator { 1.0 } else { p };
                (omega.clone(), true, gamma, 0.0, true)
            }
            SeminormDomain::AllSpace => {
                if !u.is_in_lp() {
                    return Err(u.not_in_lp_error());
                }
                let region = u.integration_box(p, 1e-14)?;
                let compact = u.bounding_box().is_some() || u.support_radius().is_some();
                let norm = lp_norm_best(u, p)?;
                let gamma = if u.has_jumps() { 1.0 } else { p };
                (region, false, gamma, 2.0 * norm.value.powf(p), compact)
            }
        };
        let breaks = (0..dim).map(|i| u.axis_breaks().get(i).cloned().unwrap_or_default()).collect();
        Ok(Self { u, dim, p, sp, region, restrict, breaks, gamma, far_value, compact, panels_per_unit: cfg.panels_per_unit })
    }

    /// D(h) by composite Gauss in x, with panels cut where u(x) or u(x + h) jumps.
    fn difference_power(&self, h: &[f64]) -> f64 {
        let axes: Vec<Vec<(f64, f64)>> = (0..self.dim)
            .map(|i| {
                let (a, b) = self.region[i];
                let (lo, hi) = if self.restrict { (a.max(a - h[i]), b.min(b - h[i])) } else { (a.min(a - h[i]), b.max(b - h[i])) };
                if hi <= lo {
                    return Vec::new();
                }
                let mut br: Vec<f64> = Vec::with_capacity(4 * self.breaks[i].len() + 4);
                for &t in self.breaks[i].iter().chain([a, b].iter()) {
                    br.push(t);
                    br.push(t - h[i]);
                }
                let width = 1.0 / self.panels_per_unit;
                quad::composite_nodes(lo, hi, &br, width, INNER_ORDER)
            })
            .collect();
        if axes.iter().any(|a| a.is_empty()) {
            return 0.0;
        }
        let mut total = 0.0;
        let mut idx = vec![0usize; self.dim];
        let mut x = [0.0; 3];
        let mut y = [0.0; 3];
        'outer: loop {
            let mut w = 1.0;
            for i in 0..self.dim {
                let (xi, wi) = axes[i][idx[i]];
                x[i] = xi;
                y[i] = xi + h[i];
                w *= wi;
            }
            let d = self.u.evaluate(&y[..self.dim]) - self.u.evaluate(&x[..self.dim]);
            total += w * d.abs().powf(self.p);
            for i in (0..self.dim).rev() {
                idx[i] += 1;
                if idx[i] < axes[i].len() {
                    continue 'outer;
                }
                idx[i] = 0;
            }
            break;
        }
        total
    }

    /// Radius along ω beyond which D(rω) is constant (0 on a box domain,
    /// 2‖u‖_p^p for separated supports), with the interior kinks.
    fn radial_range(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let mut top = f64::INFINITY;
        let mut kinks = Vec::new();
        for i in 0..self.dim {
            if w[i].abs() < 1e-14 {
                continue;
            }
            let (a, b) = self.region[i];
            top = top.min((b - a) / w[i].abs());
            let mut pts = self.breaks[i].clone();
            pts.extend([a, b]);
            for &s in &pts {
                for &t in &pts {
                    if t > s {
                        kinks.push((t - s) / w[i].abs());
                    }
                }
            }
        }
        if !self.compact {
            // decaying u: treat twice the quadrature box as separation
            top *= 2.0;
        }
        kinks.retain(|&k| k < top);
        (top, kinks)
    }

    /// ∫_0^∞ r^{−1−sp} D(rω) dr with its error estimate.
    fn along(&self, w: &[f64], cfg: &SeminormConfig) -> Result<(f64, f64)> {
        let (top, kinks) = self.radial_range(w);
        let r_min = cfg.min_radius_fraction * top;
        let mut h = vec![0.0; self.dim];
        let mut dval = |r: f64| {
            for i in 0..self.dim {
                h[i] = r * w[i];
            }
            self.difference_power(&h)
        };
        let weight = |r: f64| r.powf(-1.0 - self.sp);
        // dyadic cells [top/2^{k+1}, top/2^k] refined at the kinks
        let mut edges = vec![top];
        let mut r = top;
        while r > r_min {
            r = (0.5 * r).max(r_min);
            edges.push(r);
        }
        edges.extend(kinks);
        edges.sort_by(|a, b| b.total_cmp(a));
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        let mut value = 0.0;
        let mut err = 0.0;
        for cell in edges.windows(2) {
            let (hi, lo) = (cell[0], cell[1]);
            let fine = quad::gl(|r| weight(r) * dval(r), lo, hi, RADIAL_ORDER);
            let coarse = quad::gl(|r| weight(r) * dval(r), lo, hi, CHECK_ORDER);
            value += fine;
            err += (fine - coarse).abs();
        }
        // D(r) ≈ c r^γ below r_min, c fitted on the two smallest radii
        let r1 = r_min;
        let r2 = 2.0 * r_min;
        let c1 = dval(r1) / r1.powf(self.gamma);
        let c2 = dval(r2) / r2.powf(self.gamma);
        let expo = self.gamma - self.sp;
        let small = c1 * r_min.powf(expo) / expo;
        value += small;
        err += (c1 - c2).abs() * r_min.powf(expo) / expo;
        // far field
        if !self.restrict {
            let far = self.far_value * top.powf(-self.sp) / self.sp;
            value += far;
            if !self.compact {
                let d_top = dval(top);
                err += (d_top - self.far_value).abs() * top.powf(-self.sp) / self.sp;
            }
        }
        if !value.is_finite() {
            return Err(Error::Singularity(format!("non-finite radial integral along {w:?}")));
        }
        Ok((value, err))
    }
}
