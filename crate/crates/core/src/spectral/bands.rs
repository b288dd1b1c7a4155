use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoffs::CutoffPair;
use super::grid::{GridField, SpectralGrid};
use crate::error::{invalid, Error, Result};

/// Relative size of the zero-frequency coefficient below which a
/// homogeneous multiplier may drop it.
pub const ZERO_FREQUENCY_TOLERANCE: f64 = 1e-10;

/// P₀u (when requested) and Δ_j u over a band range.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDecomposition {
    pub base: Option<GridField>,
    pub bands: BTreeMap<i32, GridField>,
}

impl BandDecomposition {
    /// P₀u + Σ_j Δ_j u.
    pub fn reconstruct(&self) -> Result<GridField> {
        let grid = match (&self.base, self.bands.values().next()) {
            (Some(b), _) => b.grid,
            (None, Some(f)) => f.grid,
            (None, None) => return Err(invalid("empty decomposition")),
        };
        let mut acc = self.base.clone().unwrap_or_else(|| GridField::zeros(grid));
        for f in self.bands.values() {
            acc = acc.add(f)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TLParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
}

impl TLParams {
    pub fn new(s: f64, p: f64, q: f64, homogeneous: bool) -> Result<Self> {
        let t = Self { s, p, q, homogeneous };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(invalid("s must be finite"));
        }
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v > 1.0 && v.is_finite()) {
                return Err(invalid(format!("{name} = {v} must lie in (1, ∞)")));
            }
        }
        Ok(())
    }
}

/// Triebel-Lizorkin norm over the bands that were actually summed;
/// `truncated_tail` is ‖(1 − Σ ψ_j)û‖₂/‖û‖₂ over the omitted frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlNorm {
    pub value: f64,
    pub truncated_tail: f64,
    pub j_min: i32,
    pub j_max: i32,
}

fn check_bands(grid: &SpectralGrid, j_range: (i32, i32)) -> Result<()> {
    let (min, max) = grid.band_range();
    if j_range.0 > j_range.1 {
        return Err(invalid(format!("empty band range [{}, {}]", j_range.0, j_range.1)));
    }
    for j in [j_range.0, j_range.1] {
        if j < min || j > max {
            return Err(Error::UnresolvedBand { j, min, max });
        }
    }
    Ok(())
}

fn masked(grid: SpectralGrid, spec: &[Complex64], radii: &[f64], w: impl Fn(f64) -> f64) -> GridField {
    let s = spec.iter().zip(radii).map(|(c, &r)| c * w(r)).collect();
    GridField::from_dft(grid, s)
}

/// Δ_j u = F⁻¹[ψ_j û] for j in `j_range`, plus P₀u = F⁻¹[φ û] when `base`.
pub fn littlewood_paley(u: &GridField, cutoffs: &CutoffPair, j_range: (i32, i32), base: bool) -> Result<BandDecomposition> {
    check_bands(&u.grid, j_range)?;
    let spec = u.dft();
    let radii = u.grid.radii();
    let bands = (j_range.0..=j_range.1)
        .into_par_iter()
        .map(|j| (j, masked(u.grid, &spec, &radii, |r| cutoffs.psi_j(j, r))))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    let base = base.then(|| masked(u.grid, &spec, &radii, |r| cutoffs.phi(r)));
    Ok(BandDecomposition { base, bands })
}

fn zero_frequency_ratio(spec: &[Complex64]) -> f64 {
    let max = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        0.0
    } else {
        spec[0].norm() / max
    }
}

/// ‖(Σ_j |2^{js}Δ_j u|^q)^{1/q}‖_{L^p}, with |P₀u|^q added in the
/// inhomogeneous case (which sums j ≥ 1 only). The requested range is
/// clipped to the bands the grid resolves. Negative s in the homogeneous
/// case requires û(0) ≈ 0.
pub fn tl_norm(u: &GridField, params: &TLParams, cutoffs: &CutoffPair, j_range: (i32, i32)) -> Result<TlNorm> {
    params.validate()?;
    let (gmin, gmax) = u.grid.band_range();
    let lo = if params.homogeneous { j_range.0.max(gmin) } else { j_range.0.max(1).max(gmin) };
    let hi = j_range.1.min(gmax);
    if lo > hi {
        return Err(invalid(format!(
            "band range [{}, {}] does not meet the resolvable range [{gmin}, {gmax}]",
            j_range.0, j_range.1
        )));
    }
    let spec = u.dft();
    if params.homogeneous && params.s < 0.0 {
        let ratio = zero_frequency_ratio(&spec);
        if ratio > ZERO_FREQUENCY_TOLERANCE {
            return Err(Error::ZeroFrequency { ratio });
        }
    }
    let radii = u.grid.radii();
    let weighted: Vec<Vec<f64>> = (lo..=hi)
        .into_par_iter()
        .map(|j| {
            let w = 2f64.powf(j as f64 * params.s);
            masked(u.grid, &spec, &radii, |r| cutoffs.psi_j(j, r)).data.iter().map(|c| (w * c.norm()).powf(params.q)).collect()
        })
        .collect();
    let mut acc = vec![0.0; u.grid.len()];
    for band in &weighted {
        for (a, b) in acc.iter_mut().zip(band) {
            *a += b;
        }
    }
    if !params.homogeneous {
        let p0 = masked(u.grid, &spec, &radii, |r| cutoffs.phi(r));
        for (a, c) in acc.iter_mut().zip(&p0.data) {
            *a += c.norm().powf(params.q);
        }
    }
    let sum: f64 = acc.iter().map(|a| a.powf(params.p / params.q)).sum();
    let value = (sum * u.grid.cell_volume()).powf(1.0 / params.p);

    let mut total = 0.0;
    let mut missed = 0.0;
    for (i, (c, &r)) in spec.iter().zip(&radii).enumerate() {
        if params.homogeneous && i == 0 {
            continue;
        }
        let mut cover: f64 = (lo..=hi).map(|j| cutoffs.psi_j(j, r)).sum();
        if !params.homogeneous {
            cover += cutoffs.phi(r);
        }
        total += c.norm_sqr();
        missed += ((1.0 - cover) * c.norm()).powi(2);
    }
    let truncated_tail = if total > 0.0 { (missed / total).sqrt() } else { 0.0 };
    Ok(TlNorm { value, truncated_tail, j_min: lo, j_max: hi })
}

/// ‖(I − Δ)^{s/2}u‖_{L^p}: multiplier (1 + 4π²|ξ|²)^{s/2}.
pub fn bessel_norm(u: &GridField, s: f64, p: f64) -> Result<f64> {
    crate::fields::check_exponent(p)?;
    if !s.is_finite() {
        return Err(invalid("s must be finite"));
    }
    let v = u.apply_multiplier(|xi| {
        let r2: f64 = xi.iter().map(|c| c * c).sum();
        Complex64::new((1.0 + 4.0 * PI * PI * r2).powf(0.5 * s), 0.0)
    });
    Ok(v.lp_norm(p))
}

/// (−Δ)^z u: multiplier (2π|ξ|)^{2z}. The zero frequency is mapped to 0
/// unless z = 0; for Re z ≤ 0, z ≠ 0, û(0) must be negligible.
pub fn fractional_laplacian(u: &GridField, z: Complex64) -> Result<GridField> {
    if z == Complex64::new(0.0, 0.0) {
        return Ok(u.clone());
    }
    let mut spec = u.dft();
    if z.re <= 0.0 {
        let ratio = zero_frequency_ratio(&spec);
        if ratio > ZERO_FREQUENCY_TOLERANCE {
            return Err(Error::ZeroFrequency { ratio });
        }
    }
    let radii = u.grid.radii();
    for (c, &r) in spec.iter_mut().zip(&radii) {
        *c = if r == 0.0 { Complex64::new(0.0, 0.0) } else { *c * (2.0 * z * (2.0 * PI * r).ln()).exp() };
    }
    Ok(GridField::from_dft(u.grid, spec))
}

/// ‖v(· + z) − v‖_p / (min(1, 2^j)‖v‖_p) for v = Δ_{j+k}u and z = 2^{−k}e₁.
pub fn band_difference_ratio(u: &GridField, cutoffs: &CutoffPair, j: i32, k: i32, p: f64) -> Result<f64> {
    crate::fields::check_exponent(p)?;
    let band = j + k;
    check_bands(&u.grid, (band, band))?;
    let v = littlewood_paley(u, cutoffs, (band, band), false)?.bands.remove(&band).unwrap_or_else(|| GridField::zeros(u.grid));
    let shift = 2f64.powi(-k);
    let moved = v.apply_multiplier(|xi| Complex64::from_polar(1.0, 2.0 * PI * xi[0] * shift));
    let norm = v.lp_norm(p);
    if norm == 0.0 {
        return Err(invalid(format!("band {band} of the field is empty")));
    }
    Ok(moved.sub(&v)?.lp_norm(p) / (2f64.powi(j).min(1.0) * norm))
}
