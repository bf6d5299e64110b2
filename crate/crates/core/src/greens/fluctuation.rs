//! Fluctuation matrix `V(t) = ∫₀ᵗ∫₀ᵗ U(s₁) g̃(s₂ − s₁) U†(s₂) ds₁ ds₂`.
//!
//! Written in frequency space, `V(t) = Σ_l ∫ dω/2π J_l n_l ũ_l ũ_l†` with
//! `ũ_l(ω, t) = ∫₀ᵗ U(s) e^{iωs} ds e_l`. The time integral is done exactly
//! on the piecewise-linear interpolant of U, so every sample of V is a
//! positive combination of rank-one projectors.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{hat_moments, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{ComplexMat2, ModelConfig, ReservoirParams, SpectralKind};
use crate::spectral::{fermi_occupation, lead_rule, noise_half_width, SpectralModel};

/// Margin kept around the eigenvalues of M, in units of Γ.
const RESONANCE_MARGIN: f64 = 10.0;

/// Frequency interval `[lo, hi]` integrated for lead `l`, and the extra
/// breakpoints placed inside it.
pub fn fluctuation_window(config: &ModelConfig, l: usize) -> (f64, f64, Vec<f64>) {
    let lead = config.leads()[l];
    let (e_lo, e_hi) = config.hamiltonian().hermitian_eigenvalues();
    let half = noise_half_width(&ReservoirParams { cutoff: f64::INFINITY, ..*lead });
    let mut lo = (lead.mu - half).min(e_lo - RESONANCE_MARGIN);
    let mut hi = (lead.mu + half).max(e_hi + RESONANCE_MARGIN);
    if config.spectral_kind == SpectralKind::CutoffLorentzian {
        let (a, b) = lead.band();
        lo = lo.max(a);
        hi = hi.min(b);
    }
    (lo, hi, vec![e_lo, e_hi])
}

/// V(t_k) for k = 0..=n_steps from a propagator sampled on `grid`.
pub fn compute_fluctuation(u_seq: &[ComplexMat2], config: &ModelConfig, grid: TimeGrid) -> Result<Vec<ComplexMat2>> {
    if u_seq.len() != grid.len() {
        return Err(Error::Solver(format!(
            "propagator has {} samples, grid has {}",
            u_seq.len(),
            grid.len()
        )));
    }
    if config.spectral_kind == SpectralKind::WideBand {
        return Err(Error::Unsupported("band quadrature of the flat spectrum; use wbl_greens"));
    }
    let model = SpectralModel::from(config);
    let dt = grid.dt();
    let n = grid.n_steps;
    // accumulators: V11, V22 (real) and V12
    let mut v11 = vec![0.0; n + 1];
    let mut v22 = vec![0.0; n + 1];
    let mut v12 = vec![C64::new(0.0, 0.0); n + 1];

    for l in 0..2 {
        let lead = config.leads()[l];
        if lead.gamma == 0.0 {
            continue;
        }
        let (lo, hi, extra) = fluctuation_window(config, l);
        if hi <= lo {
            continue;
        }
        let rule = lead_rule(lead, lo, hi, grid.t_max, &extra);
        let col: Vec<[C64; 2]> = u_seq.iter().map(|u| [u[(0, l)], u[(1, l)]]).collect();
        for (&w, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let amp = wt * model.lead_density(l, w) * fermi_occupation(w, lead.mu, lead.k_t) / (2.0 * PI);
            if amp == 0.0 {
                continue;
            }
            let amp = amp * dt * dt;
            let theta = w * dt;
            let (e0, e1) = hat_moments(C64::new(0.0, theta));
            let h_left = e0 - e1;
            let h_right = C64::from_polar(1.0, -theta) * e1;
            let s = h_left + h_right;
            let c_right = s - h_left;
            let c_left0 = (s - h_right) * col[0][0];
            let c_left1 = (s - h_right) * col[0][1];
            let step = C64::from_polar(1.0, theta);
            let mut phase = C64::new(1.0, 0.0);
            let mut acc = col[0];
            for k in 1..=n {
                if k % 128 == 0 {
                    phase = C64::from_polar(1.0, theta * k as f64);
                } else {
                    phase *= step;
                }
                let x0 = col[k][0] * phase;
                let x1 = col[k][1] * phase;
                acc[0] += x0;
                acc[1] += x1;
                let y0 = s * acc[0] - c_left0 - c_right * x0;
                let y1 = s * acc[1] - c_left1 - c_right * x1;
                v11[k] += amp * y0.norm_sqr();
                v22[k] += amp * y1.norm_sqr();
                v12[k] += amp * y0 * y1.conj();
            }
        }
    }
    Ok((0..=n)
        .map(|k| ComplexMat2::new(v11[k].into(), v12[k], v12[k].conj(), v22[k].into()))
        .collect())
}
