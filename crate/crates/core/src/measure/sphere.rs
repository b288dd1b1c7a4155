use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quad;

const TOL: f64 = 1e-13;

/// ∫_{S^{N−1}} |e·ω|^p dω for a unit vector e, by adaptive Gauss-Legendre
/// in spherical coordinates split where e·ω changes sign.
pub fn sphere_integral(p: f64, dim: usize, e: &[f64]) -> Result<f64> {
    crate::fields::check_exponent(p)?;
    if e.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: e.len() });
    }
    let norm = e.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("direction must be a unit vector, |e| = {norm}")));
    }
    match dim {
        1 => Ok(2.0 * e[0].abs().powf(p)),
        2 => circle(p, e[0], e[1]),
        3 => sphere(p, e),
        n => Err(Error::UnsupportedDimension(n)),
    }
}

/// ∫_0^{2π} |a cos φ + b sin φ|^p dφ split at the zeros.
fn circle(p: f64, a: f64, b: f64) -> Result<f64> {
    let amp = (a * a + b * b).sqrt();
    if amp == 0.0 {
        return Ok(0.0);
    }
    let phase = b.atan2(a);
    let z1 = phase + 0.5 * PI;
    let z2 = phase + 1.5 * PI;
    let zeros: Vec<f64> = [z1, z2, z1 - 2.0 * PI, z2 - 2.0 * PI, z1 + 2.0 * PI]
        .into_iter()
        .filter(|&z| z > 0.0 && z < 2.0 * PI)
        .collect();
    let f = |phi: f64| (a * phi.cos() + b * phi.sin()).abs().powf(p);
    Ok(quad::adaptive_split(f, 0.0, 2.0 * PI, &zeros, 0.0, TOL)?.value)
}

fn sphere(p: f64, e: &[f64]) -> Result<f64> {
    let (ex, ey, ez) = (e[0], e[1], e[2]);
    let horiz = (ex * ex + ey * ey).sqrt();
    // e·ω vanishes somewhere on the latitude θ iff t1 <= θ <= π − t1
    let t1 = ez.abs().atan2(horiz);
    let breaks = [t1, PI - t1];
    let mut failure = None;
    // ex cosφ + ey sinφ = horiz·cos(φ − φ₀); the φ-integral is phase invariant
    let inner = |theta: f64| {
        let (st, ct) = theta.sin_cos();
        match shifted_circle(p, ez * ct, st * horiz) {
            Ok(v) => v * st,
            Err(err) => {
                failure = Some(err);
                0.0
            }
        }
    };
    let v = quad::adaptive_split(inner, 0.0, PI, &breaks, 0.0, TOL)?.value;
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// ∫_0^{2π} |c + r cos φ|^p dφ, r ≥ 0.
fn shifted_circle(p: f64, c: f64, r: f64) -> Result<f64> {
    let f = |phi: f64| (c + r * phi.cos()).abs().powf(p);
    if r > c.abs() {
        let z = (-c / r).acos();
        Ok(quad::adaptive_split(f, 0.0, 2.0 * PI, &[z, 2.0 * PI - z], 0.0, TOL)?.value)
    } else {
        Ok(quad::adaptive(f, 0.0, 2.0 * PI, 0.0, TOL)?.value)
    }
}
