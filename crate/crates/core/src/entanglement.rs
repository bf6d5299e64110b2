//! Entanglement of formation between the two dot modes for even-parity
//! states: `Ē = −½ Σ_σ tr(ρ_σ) K_σ` with
//! `K = (1−λ) log₂((1−λ)/2) + (1+λ) log₂((1+λ)/2)` and
//! `λ = (ρ₁₁ − ρ₂₂)/√((ρ₁₁ − ρ₂₂)² + 4|ρ₁₂|²)`.

use crate::model::ComplexMat2;
use crate::state::DensityBlocks;

/// Both |ρ₁₁ − ρ₂₂| and |ρ₁₂| below this select the K = 0 branch.
pub const DEGENERATE_TOL: f64 = 1e-12;
/// Negative values of Ē down to −this are rounding and reported as 0.
pub const NEGATIVE_CLAMP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EofResult {
    pub value: f64,
    /// λ₁, λ₂ for (rho1, rho2); 0 on the degenerate branch.
    pub lambda: [f64; 2],
    pub k_terms: [f64; 2],
}

fn xlog2x_half(x: f64) -> f64 {
    // x log₂(x/2) with 0·log 0 = 0
    if x <= 0.0 {
        0.0
    } else {
        x * (0.5 * x).log2()
    }
}

/// `(λ, K)` for one 2×2 block.
fn block_terms(rho: &ComplexMat2) -> (f64, f64) {
    let diff = rho.a().re - rho.d().re;
    let off = rho.b().norm();
    if diff.abs() < DEGENERATE_TOL && off < DEGENERATE_TOL {
        return (0.0, 0.0);
    }
    let lambda = (diff / (diff * diff + 4.0 * off * off).sqrt()).clamp(-1.0, 1.0);
    (lambda, xlog2x_half(1.0 - lambda) + xlog2x_half(1.0 + lambda))
}

pub fn fermionic_eof(rho: &DensityBlocks) -> EofResult {
    let (l1, k1) = block_terms(&rho.rho1);
    let (l2, k2) = block_terms(&rho.rho2);
    let raw = -0.5 * (rho.rho1.trace().re * k1 + rho.rho2.trace().re * k2);
    let value = if raw <= 0.0 && raw > -NEGATIVE_CLAMP { 0.0 } else { raw };
    EofResult { value, lambda: [l1, l2], k_terms: [k1, k2] }
}

/// `Ē^s = (det V − ½ tr V) K₂` for the thermalized state of `v_s`.
pub fn steady_state_eof(v_s: &ComplexMat2) -> f64 {
    let (_, k2) = block_terms(v_s);
    let raw = (v_s.det().re - 0.5 * v_s.trace().re) * k2;
    if raw <= 0.0 && raw > -NEGATIVE_CLAMP {
        0.0
    } else {
        raw
    }
}
