//! Quadrature building blocks: cached Gauss-Legendre rules, adaptive
//! bisection, midpoint cells aligned to breakpoints, and product rules on
//! spheres and balls in dimensions 1-3.

use std::f64::consts::PI;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

const MAX_ORDER: usize = 64;

static RULES: [OnceLock<Vec<(f64, f64)>>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];

/// Gauss-Legendre nodes and weights on [-1, 1], sorted by node.
pub fn gauss_legendre(order: usize) -> &'static [(f64, f64)] {
    assert!((2..=MAX_ORDER).contains(&order), "Gauss-Legendre order {order} out of range");
    RULES[order].get_or_init(|| {
        let rule = GaussLegendre::new(order).expect("order >= 2");
        let mut pairs = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    })
}

/// Fixed-order Gauss-Legendre on [a, b].
pub fn gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, order: usize) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for &(t, w) in gauss_legendre(order) {
        acc += w * f(mid + half * t);
    }
    acc * half
}

/// Result of an adaptive integration: value and an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Adaptive bisection driven by the difference between a 10-point rule on a
/// panel and on its two halves. Panels are processed depth-first in a fixed
/// order so the result is reproducible.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    const ORDER: usize = 10;
    const MAX_DEPTH: u32 = 48;
    const MAX_PANELS: usize = 200_000;
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let whole = gl(&mut f, a, b, ORDER);
    // (a, b, coarse estimate, depth)
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = 0usize;
    let scale = whole.abs().max(f64::MIN_POSITIVE);
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::Quadrature(format!("panel budget exhausted on [{a}, {b}]")));
        }
        let mid = 0.5 * (lo + hi);
        let left = gl(&mut f, lo, mid, ORDER);
        let right = gl(&mut f, mid, hi, ORDER);
        let fine = left + right;
        let diff = (fine - coarse).abs();
        let width_share = (hi - lo) / (b - a).abs();
        let allowed = (abs_tol.max(rel_tol * scale)) * width_share.abs();
        let roundoff = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if diff <= allowed.max(roundoff) || depth >= MAX_DEPTH || (hi - lo).abs() < 1e-15 * (1.0 + lo.abs()) {
            value += fine;
            error += diff;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(Integral { value, error })
}

/// Adaptive integration over [a, b] split at the given interior breakpoints.
pub fn adaptive_split<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral> {
    let knots = knots_between(a, b, breaks);
    let mut total = Integral { value: 0.0, error: 0.0 };
    let pieces = (knots.len() - 1) as f64;
    // tolerances refer to the whole integral, not to each piece
    let rough: f64 = knots.windows(2).map(|w| gl(&mut f, w[0], w[1], 10)).sum();
    let abs_tol = abs_tol.max(rel_tol * rough.abs());
    for w in knots.windows(2) {
        let part = adaptive(&mut f, w[0], w[1], abs_tol / pieces, rel_tol)?;
        total.value += part.value;
        total.error += part.error;
    }
    Ok(total)
}

/// Sorted, deduplicated knot list `a, breaks ∩ (a, b)..., b`.
pub fn knots_between(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut knots = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    inner.sort_by(f64::total_cmp);
    for t in inner {
        if t - knots.last().copied().unwrap_or(a) > 1e-14 * (1.0 + t.abs()) {
            knots.push(t);
        }
    }
    knots.push(b);
    knots
}

/// Composite Gauss-Legendre over [a, b] with panels cut at `breaks` and
/// each piece split into roughly equal panels of width at most `max_width`.
pub fn composite_nodes(a: f64, b: f64, breaks: &[f64], max_width: f64, order: usize) -> Vec<(f64, f64)> {
    let knots = knots_between(a, b, breaks);
    let rule = gauss_legendre(order);
    let mut out = Vec::new();
    for w in knots.windows(2) {
        let len = w[1] - w[0];
        let panels = (len / max_width).ceil().max(1.0) as usize;
        let h = len / panels as f64;
        for k in 0..panels {
            let lo = w[0] + k as f64 * h;
            let mid = lo + 0.5 * h;
            for &(t, wt) in rule {
                out.push((mid + 0.5 * h * t, 0.5 * h * wt));
            }
        }
    }
    out
}

/// Midpoint cells over [a, b] whose edges include every breakpoint; about
/// `n` cells in total, distributed in proportion to segment length.
pub fn midpoint_cells(a: f64, b: f64, breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    let knots = knots_between(a, b, breaks);
    let total = b - a;
    let mut out = Vec::with_capacity(n + knots.len());
    for w in knots.windows(2) {
        let len = w[1] - w[0];
        let cells = ((n as f64) * len / total).round().max(1.0) as usize;
        let h = len / cells as f64;
        for k in 0..cells {
            out.push((w[0] + (k as f64 + 0.5) * h, h));
        }
    }
    out
}

/// Product rule on the unit sphere S^{N-1}: directions with weights summing
/// to the surface area. `resolution` sets the number of azimuthal nodes.
pub fn sphere_rule(dim: usize, resolution: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match dim {
        1 => Ok(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]),
        2 => {
            let m = resolution.max(4);
            let dt = 2.0 * PI / m as f64;
            Ok((0..m)
                .map(|k| {
                    let t = (k as f64 + 0.5) * dt;
                    (vec![t.cos(), t.sin()], dt)
                })
                .collect())
        }
        3 => {
            let m = resolution.max(4);
            let polar = (m / 2).clamp(2, MAX_ORDER);
            let dphi = 2.0 * PI / m as f64;
            let mut out = Vec::with_capacity(m * polar);
            for &(c, wc) in gauss_legendre(polar) {
                let st = (1.0 - c * c).max(0.0).sqrt();
                for k in 0..m {
                    let phi = (k as f64 + 0.5) * dphi;
                    out.push((vec![st * phi.cos(), st * phi.sin(), c], wc * dphi));
                }
            }
            Ok(out)
        }
        n => Err(Error::UnsupportedDimension(n)),
    }
}

/// Product rule on the ball B_R ⊂ R^N (midpoint in the radius, uniform in
/// azimuth, Gauss in the polar cosine). Weights sum to the ball volume up to
/// the midpoint error in r^{N-1}.
pub fn ball_rule(dim: usize, radius: f64, n: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match dim {
        1 => Ok(midpoint_cells(-radius, radius, &[], n.max(1))
            .into_iter()
            .map(|(x, w)| (vec![x], w))
            .collect()),
        2 | 3 => {
            let radial = (n / 2).max(1);
            let dr = radius / radial as f64;
            let dirs = sphere_rule(dim, n.max(4))?;
            let mut out = Vec::with_capacity(radial * dirs.len());
            for i in 0..radial {
                let lo = i as f64 * dr;
                let hi = lo + dr;
                let r = 0.5 * (lo + hi);
                // exact shell volume keeps the total weight equal to κ_N R^N
                let shell = (hi.powi(dim as i32) - lo.powi(dim as i32)) / dim as f64;
                for (d, w) in &dirs {
                    out.push((d.iter().map(|c| c * r).collect(), w * shell));
                }
            }
            Ok(out)
        }
        n => Err(Error::UnsupportedDimension(n)),
    }
}

/// Tensor composite Gauss nodes over a box given per-axis 1-D rules.
pub fn tensor_nodes(axes: &[Vec<(f64, f64)>]) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = vec![(Vec::with_capacity(axes.len()), 1.0)];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for (p, w) in &out {
            for &(x, wx) in axis {
                let mut q = p.clone();
                q.push(x);
                next.push((q, w * wx));
            }
        }
        out = next;
    }
    out
}
