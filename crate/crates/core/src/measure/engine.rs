use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{EstimatorConfig, MeasureEstimate, Method, QuotientParams};
use crate::error::{invalid, Result};
use crate::fields::{decay_tail_bound, Decay, TestFunction};
use crate::norms::unit_ball_volume;
use crate::quad;

/// Growth factor of the geometric samples near r = 0.
const GEOMETRIC_RATIO: f64 = 1.3;
/// Diagonal strip |x − y| < DIAGONAL_FRACTION·diam(K) is skipped.
const DIAGONAL_FRACTION: f64 = 1e-9;
/// For decaying u the box is chosen so that |u| ≤ DECAY_LEVEL·sup|u| outside.
const DECAY_LEVEL: f64 = 1e-10;
const GAUSS_ORDER: usize = 8;

struct Exterior {
    /// Bound on |u| outside K.
    eps: f64,
    decay: Option<Decay>,
}

struct Problem<'a> {
    u: &'a TestFunction,
    dim: usize,
    lambda: f64,
    alpha: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    volume: f64,
    /// None when nothing is known about u outside K.
    exterior: Option<Exterior>,
    dirs: Vec<(Vec<f64>, f64)>,
    r_diag: f64,
    ray_samples: usize,
    symmetric: bool,
    breaks: Vec<Vec<f64>>,
}

pub(super) fn estimate(u: &TestFunction, q: &QuotientParams, lambda: f64, cfg: &EstimatorConfig) -> Result<MeasureEstimate> {
    let pb = Problem::new(u, q, lambda, cfg)?;
    let (measure, std_error, mut tail) = match cfg.method {
        Method::RadialSections => pb.radial_sections(cfg),
        Method::TensorQuadrature => pb.tensor(cfg),
        Method::StratifiedMc => pb.stratified(cfg),
    };
    tail += pb.outside_pairs_bound();
    Ok(MeasureEstimate { lambda, measure, std_error, tail_bound: tail, method: cfg.method })
}

impl<'a> Problem<'a> {
    fn new(u: &'a TestFunction, q: &QuotientParams, lambda: f64, cfg: &EstimatorConfig) -> Result<Self> {
        let dim = u.dimension();
        let (bx, exterior) = if !u.is_in_lp() {
            if !cfg.permit_non_lp {
                return Err(u.not_in_lp_error());
            }
            let l = cfg.box_halfwidth.unwrap_or(1.0);
            (vec![(-l, l); dim], None)
        } else if let Some(b) = u.bounding_box() {
            (b.to_vec(), Some(Exterior { eps: 0.0, decay: None }))
        } else if let Some(r) = u.support_radius() {
            (vec![(-r, r); dim], Some(Exterior { eps: 0.0, decay: None }))
        } else if let Some(d) = u.decay() {
            let l = cfg.box_halfwidth.unwrap_or_else(|| d.radius_below(DECAY_LEVEL * u.sup_norm().max(f64::MIN_POSITIVE)));
            (vec![(-l, l); dim], Some(Exterior { eps: d.envelope(l).min(u.sup_norm()), decay: Some(d) }))
        } else {
            let l = cfg
                .box_halfwidth
                .ok_or_else(|| invalid(format!("{} has no support or decay bound; set box_halfwidth", u.name())))?;
            (vec![(-l, l); dim], None)
        };
        let lo: Vec<f64> = bx.iter().map(|b| b.0).collect();
        let hi: Vec<f64> = bx.iter().map(|b| b.1).collect();
        let volume = bx.iter().map(|b| b.1 - b.0).product();
        let diam = bx.iter().map(|b| (b.1 - b.0).powi(2)).sum::<f64>().sqrt();
        let breaks = bx
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let mut v: Vec<f64> = u.axis_breaks().get(i).cloned().unwrap_or_default();
                v.retain(|&t| t > a && t < b);
                v
            })
            .collect();
        Ok(Self {
            u,
            dim,
            lambda,
            alpha: q.exponent(dim),
            lo,
            hi,
            volume,
            exterior,
            dirs: quad::sphere_rule(dim, cfg.directions)?,
            r_diag: DIAGONAL_FRACTION * diam,
            ray_samples: cfg.ray_samples,
            symmetric: cfg.symmetric,
            breaks,
        })
    }

    fn pair_factor(&self) -> f64 {
        if self.symmetric {
            2.0
        } else {
            1.0
        }
    }

    /// (|v|/λ)^{1/α}: the largest distance at which a jump of size |v| is seen.
    fn reach(&self, v: f64) -> f64 {
        (v.abs() / self.lambda).powf(1.0 / self.alpha)
    }

    fn exit_distance(&self, x: &[f64], w: &[f64]) -> f64 {
        let mut t = f64::INFINITY;
        for i in 0..self.dim {
            if w[i] > 0.0 {
                t = t.min((self.hi[i] - x[i]) / w[i]);
            } else if w[i] < 0.0 {
                t = t.min((self.lo[i] - x[i]) / w[i]);
            }
        }
        t.max(0.0)
    }

    fn farthest_corner(&self, x: &[f64]) -> f64 {
        (0..self.dim)
            .map(|i| (x[i] - self.lo[i]).abs().max((self.hi[i] - x[i]).abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Measure of {y ∉ K : |u(x) − u(y)| ≥ λ|x − y|^α} for x ∈ K, with the
    /// width of the sandwich caused by |u(y)| ≤ ε.
    fn exterior(&self, x: &[f64], ux: f64) -> (f64, f64) {
        let Some(ext) = &self.exterior else { return (0.0, 0.0) };
        let nominal = self.ball_minus_box(x, self.reach(ux));
        if ext.eps == 0.0 {
            return (nominal, 0.0);
        }
        let upper = self.ball_minus_box(x, self.reach(ux.abs() + ext.eps));
        let lower = self.ball_minus_box(x, self.reach((ux.abs() - ext.eps).max(0.0)));
        (nominal, upper - lower)
    }

    /// |B(x, ρ) \ K| for x ∈ K.
    fn ball_minus_box(&self, x: &[f64], rho: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let n = self.dim as i32;
        if self.dim == 1 {
            return (x[0] + rho - self.hi[0]).max(0.0) + (self.lo[0] - (x[0] - rho)).max(0.0);
        }
        if rho >= self.farthest_corner(x) {
            return unit_ball_volume(self.dim) * rho.powi(n) - self.volume;
        }
        let mut acc = 0.0;
        for (w, wt) in &self.dirs {
            let re = self.exit_distance(x, w);
            if rho > re {
                acc += wt * (rho.powi(n) - re.powi(n));
            }
        }
        acc / self.dim as f64
    }

    /// Bound for pairs with both points outside K.
    fn outside_pairs_bound(&self) -> f64 {
        match &self.exterior {
            None => f64::INFINITY,
            Some(Exterior { decay: None, .. }) => 0.0,
            Some(Exterior { decay: Some(d), .. }) => {
                // |u(x) − u(y)| ≤ 2g(|x|) when |x| ≤ |y|, so y lies in a ball of
                // radius (2g(|x|)/λ)^{1/α} around x
                let inner = (0..self.dim).map(|i| self.lo[i].abs().min(self.hi[i].abs())).fold(f64::INFINITY, f64::min);
                let q = self.dim as f64 / self.alpha;
                let scaled = Decay { amplitude: 2.0 * d.amplitude / self.lambda, ..*d };
                2.0 * unit_ball_volume(self.dim) * decay_tail_bound(&scaled, self.dim, q, inner)
            }
        }
    }

    fn point(&self, x: &[f64], w: &[f64], r: f64, buf: &mut [f64; 3]) {
        for i in 0..self.dim {
            buf[i] = x[i] + r * w[i];
        }
    }

    /// ∫ r^{N−1} dr over {r ∈ (a, b) : |u(x + rω) − u(x)| ≥ λ r^α}.
    fn ray_measure(&self, x: &[f64], ux: f64, w: &[f64], a: f64, b: f64, hints: &[f64]) -> f64 {
        let start = a.max(self.r_diag);
        if b <= start {
            return 0.0;
        }
        let n = self.ray_samples;
        let du = (b - start) / n as f64;
        let mut rs = Vec::with_capacity(n + 96 + hints.len());
        let mut r = start;
        while r < start + du {
            rs.push(r);
            r *= GEOMETRIC_RATIO;
        }
        for k in 1..n {
            rs.push(start + k as f64 * du);
        }
        rs.push(b);
        rs.extend(hints.iter().copied().filter(|&h| h > start && h < b));
        for (i, br) in self.breaks.iter().enumerate() {
            if w[i] != 0.0 {
                rs.extend(br.iter().map(|&t| (t - x[i]) / w[i]).filter(|&h| h > start && h < b));
            }
        }
        rs.sort_by(f64::total_cmp);
        rs.dedup();

        let mut buf = [0.0; 3];
        let mut f = |r: f64| {
            self.point(x, w, r, &mut buf);
            (self.u.evaluate(&buf[..self.dim]) - ux).abs() - self.lambda * r.powf(self.alpha)
        };
        let n_dim = self.dim as i32;
        let shell = |lo: f64, hi: f64| (hi.powi(n_dim) - lo.powi(n_dim)) / n_dim as f64;
        let mut acc = 0.0;
        let mut prev_r = rs[0];
        let mut prev_f = f(prev_r);
        for &r in &rs[1..] {
            let fr = f(r);
            match (prev_f >= 0.0, fr >= 0.0) {
                (true, true) => acc += shell(prev_r, r),
                (true, false) => acc += shell(prev_r, bisect(&mut f, prev_r, r, true)),
                (false, true) => acc += shell(bisect(&mut f, prev_r, r, false), r),
                (false, false) => {}
            }
            prev_r = r;
            prev_f = fr;
        }
        acc
    }

    /// Core and exterior contributions of one x node.
    fn node_contribution(&self, x: &[f64]) -> (f64, f64) {
        let ux = self.u.evaluate(x);
        let sup = self.u.sup_norm();
        let mut hints = Vec::with_capacity(4);
        for v in [ux.abs(), sup, sup + ux.abs(), (sup - ux.abs()).abs()] {
            if v > 0.0 {
                hints.push(self.reach(v));
            }
        }
        let mut core = 0.0;
        for (w, wt) in &self.dirs {
            let a = if self.symmetric {
                let xw: f64 = x.iter().zip(w).map(|(p, q)| p * q).sum();
                (-2.0 * xw).max(0.0)
            } else {
                0.0
            };
            let b = self.exit_distance(x, w);
            if b > a {
                core += wt * self.ray_measure(x, ux, w, a, b, &hints);
            }
        }
        let (ext, ext_err) = self.exterior(x, ux);
        (self.pair_factor() * core + 2.0 * ext, 2.0 * ext_err)
    }

    /// Tensor Gauss rule of the given order over K, split at the axis breaks
    /// and at 0.
    fn x_rule(&self, panels: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
        let axes: Vec<Vec<(f64, f64)>> = (0..self.dim)
            .map(|i| {
                let mut br = self.breaks[i].clone();
                br.push(0.0);
                let width = (self.hi[i] - self.lo[i]) / panels as f64;
                quad::composite_nodes(self.lo[i], self.hi[i], &br, width * (1.0 + 1e-12), order)
            })
            .collect();
        quad::tensor_nodes(&axes)
    }

    fn integrate_x(&self, nodes: &[(Vec<f64>, f64)]) -> (f64, f64) {
        let parts: Vec<(f64, f64)> = nodes
            .par_iter()
            .map(|(x, w)| {
                let (v, e) = self.node_contribution(x);
                (w * v, w * e)
            })
            .collect();
        parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1))
    }

    /// The x-quadrature error added to the tail is the larger discrepancy
    /// against a half-order rule on the same panels and against the full
    /// rule on half as many panels.
    fn radial_sections(&self, cfg: &EstimatorConfig) -> (f64, f64, f64) {
        let per_axis = nodes_per_axis(cfg.samples_or_nodes, self.dim);
        let panels = per_axis.div_ceil(GAUSS_ORDER).max(1);
        let (m, e) = self.integrate_x(&self.x_rule(panels, GAUSS_ORDER));
        let (low_order, _) = self.integrate_x(&self.x_rule(panels, GAUSS_ORDER / 2));
        let mut x_error = (m - low_order).abs();
        if panels > 1 {
            let (half, _) = self.integrate_x(&self.x_rule(panels / 2, GAUSS_ORDER));
            x_error = x_error.max((m - half).abs());
        }
        let diagonal = self.pair_factor() * self.volume * unit_ball_volume(self.dim) * self.r_diag.powi(self.dim as i32);
        (m, 0.0, e + diagonal + x_error)
    }

    fn in_set(&self, x: &[f64], ux: f64, y: &[f64], uy: f64) -> bool {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 > 0.0 && (ux - uy).abs() >= self.lambda * d2.sqrt().powf(self.alpha)
    }

    /// Weight of the ordered pair (x, y) under the half-space reduction;
    /// ties |x| = |y| count half on each side.
    fn half_weight(&self, x: &[f64], y: &[f64]) -> f64 {
        if !self.symmetric {
            return 1.0;
        }
        let nx: f64 = x.iter().map(|c| c * c).sum();
        let ny: f64 = y.iter().map(|c| c * c).sum();
        if ny > nx {
            2.0
        } else if ny == nx {
            1.0
        } else {
            0.0
        }
    }

    fn tensor(&self, cfg: &EstimatorConfig) -> (f64, f64, f64) {
        let per_axis = nodes_per_axis(cfg.samples_or_nodes, self.dim);
        let axes: Vec<Vec<(f64, f64)>> = (0..self.dim)
            .map(|i| quad::midpoint_cells(self.lo[i], self.hi[i], &self.breaks[i], per_axis))
            .collect();
        let nodes = quad::tensor_nodes(&axes);
        let values: Vec<f64> = nodes.iter().map(|(x, _)| self.u.evaluate(x)).collect();
        let parts: Vec<(f64, f64)> = nodes
            .par_iter()
            .enumerate()
            .map(|(i, (x, wx))| {
                let ux = values[i];
                let mut core = 0.0;
                for (j, (y, wy)) in nodes.iter().enumerate() {
                    let h = self.half_weight(x, y);
                    if h > 0.0 && i != j && self.in_set(x, ux, y, values[j]) {
                        core += h * wy;
                    }
                }
                let (ext, ext_err) = self.exterior(x, ux);
                (wx * (core + 2.0 * ext), wx * 2.0 * ext_err)
            })
            .collect();
        let (m, e) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        // the skipped diagonal cells
        let diagonal: f64 = nodes.iter().map(|(_, w)| w * w).sum();
        (m, 0.0, e + diagonal)
    }

    fn stratified(&self, cfg: &EstimatorConfig) -> (f64, f64, f64) {
        let k = cfg.strata_per_axis;
        let strata = k.pow(self.dim as u32);
        let n = cfg.samples_or_nodes;
        let cell: Vec<f64> = (0..self.dim).map(|i| (self.hi[i] - self.lo[i]) / k as f64).collect();
        let cell_volume: f64 = cell.iter().product();
        let parts: Vec<(f64, f64, f64)> = (0..strata)
            .into_par_iter()
            .map(|idx| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
                rng.set_stream(idx as u64);
                let mut corner = [0.0; 3];
                let mut rem = idx;
                for i in 0..self.dim {
                    corner[i] = self.lo[i] + (rem % k) as f64 * cell[i];
                    rem /= k;
                }
                let (mut sum, mut sum2, mut ext_err) = (0.0, 0.0, 0.0);
                let mut x = [0.0; 3];
                let mut y = [0.0; 3];
                for _ in 0..n {
                    for i in 0..self.dim {
                        x[i] = corner[i] + rng.gen::<f64>() * cell[i];
                        y[i] = self.lo[i] + rng.gen::<f64>() * (self.hi[i] - self.lo[i]);
                    }
                    let (xs, ys) = (&x[..self.dim], &y[..self.dim]);
                    let ux = self.u.evaluate(xs);
                    let uy = self.u.evaluate(ys);
                    let core = if self.in_set(xs, ux, ys, uy) { self.half_weight(xs, ys) * self.volume } else { 0.0 };
                    let (ext, e) = self.exterior(xs, ux);
                    let z = cell_volume * (core + 2.0 * ext);
                    sum += z;
                    sum2 += z * z;
                    ext_err += cell_volume * 2.0 * e;
                }
                let mean = sum / n as f64;
                let var = if n > 1 { ((sum2 - n as f64 * mean * mean) / (n - 1) as f64).max(0.0) } else { mean * mean };
                (mean, var / n as f64, ext_err / n as f64)
            })
            .collect();
        let mut m = 0.0;
        let mut var = 0.0;
        let mut e = 0.0;
        for p in &parts {
            m += p.0;
            var += p.1;
            e += p.2;
        }
        (m, var.sqrt(), e)
    }
}

fn nodes_per_axis(total: usize, dim: usize) -> usize {
    ((total as f64).powf(1.0 / dim as f64).round() as usize).max(2)
}

/// Locates the sign change of f on [a, b]; `left_nonneg` is the sign at a.
fn bisect<F: FnMut(f64) -> f64>(f: &mut F, mut a: f64, mut b: f64, left_nonneg: bool) -> f64 {
    for _ in 0..100 {
        if b - a <= 1e-13 * b.abs() {
            break;
        }
        let m = 0.5 * (a + b);
        if (f(m) >= 0.0) == left_nonneg {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
