use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Radial cutoffs φ (1 on |ξ| ≤ 1, 0 on |ξ| ≥ 2) and ψ(ξ) = φ(ξ) − φ(2ξ),
/// built from g(t) = exp(−σ/t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffPair {
    pub sharpness: f64,
}

pub fn build_cutoffs(transition_sharpness: f64) -> Result<CutoffPair> {
    if !(transition_sharpness > 0.0 && transition_sharpness.is_finite()) {
        return Err(invalid(format!("transition sharpness {transition_sharpness} must be positive")));
    }
    Ok(CutoffPair { sharpness: transition_sharpness })
}

impl Default for CutoffPair {
    fn default() -> Self {
        Self { sharpness: 1.0 }
    }
}

impl CutoffPair {
    fn g(&self, t: f64) -> f64 {
        if t > 0.0 {
            (-self.sharpness / t).exp()
        } else {
            0.0
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            let a = self.g(2.0 - r);
            a / (a + self.g(r - 1.0))
        }
    }

    pub fn psi(&self, r: f64) -> f64 {
        self.phi(r) - self.phi(2.0 * r)
    }

    /// ψ_j(ξ) = ψ(2^{−j}ξ).
    pub fn psi_j(&self, j: i32, r: f64) -> f64 {
        self.psi(r * 2f64.powi(-j))
    }

    /// φ(ξ/2) − φ(4ξ): equal to 1 on supp ψ, supported in 1/4 ≤ |ξ| ≤ 4.
    pub fn widened(&self, r: f64) -> f64 {
        self.phi(0.5 * r) - self.phi(4.0 * r)
    }
}
