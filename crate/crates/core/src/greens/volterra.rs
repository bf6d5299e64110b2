//! Product-integration solver for the Dyson equation
//! `U̇ + iMU + ∫₀ᵗ g(t−s) U(s) ds = 0`, `U(0) = I`.
//!
//! U is treated as piecewise linear between grid points; the convolution is
//! integrated exactly against that interpolant, and the ODE part is advanced
//! with the trapezoidal rule. The newest value enters linearly, so each step
//! is a single 2×2 linear solve.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{diag_mul, hat_moments, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{ComplexMat2, ModelConfig, SpectralKind};
use crate::spectral::{fourier_series_table, lead_rule, SpectralModel};

/// Largest `dt·‖M‖` the trapezoidal step is trusted with.
const MAX_PHASE_PER_STEP: f64 = 1.0;

/// Convolution weights for the memory kernel against hat functions:
/// `left[m] = ∫₀^dt g(m·dt + x)(1 − x/dt) dx`, `right[m] = ∫₀^dt g(m·dt + x)(x/dt) dx`.
#[derive(Clone, Debug)]
pub struct MemoryWeights {
    pub left: Vec<[C64; 2]>,
    pub right: Vec<[C64; 2]>,
}

impl MemoryWeights {
    pub fn build(model: &SpectralModel, dt: f64, n: usize) -> Result<Self> {
        if model.kind == SpectralKind::WideBand {
            return Err(Error::Unsupported("memory weights of the wide-band kernel"));
        }
        let mut left = vec![[C64::new(0.0, 0.0); 2]; n + 1];
        let mut right = left.clone();
        for l in 0..2 {
            let lead = &model.leads[l];
            if lead.gamma == 0.0 {
                continue;
            }
            if model.has_cutoff(l) {
                let (lo, hi) = lead.band();
                let cold = crate::model::ReservoirParams { k_t: 0.0, ..*lead };
                let rule = lead_rule(&cold, lo, hi, dt * (n + 1) as f64, &[]);
                let mut amp_l = Vec::with_capacity(rule.len());
                let mut amp_r = Vec::with_capacity(rule.len());
                for (&w, &wt) in rule.nodes.iter().zip(&rule.weights) {
                    let base = wt * model.lead_density(l, w) / (2.0 * PI) * dt;
                    let (e0, e1) = hat_moments(C64::new(0.0, -w * dt));
                    amp_l.push(base * (e0 - e1));
                    amp_r.push(base * e1);
                }
                let tl = fourier_series_table(&rule.nodes, &amp_l, dt, n);
                let tr = fourier_series_table(&rule.nodes, &amp_r, dt, n);
                for m in 0..=n {
                    left[m][l] = tl[m];
                    right[m][l] = tr[m];
                }
            } else {
                // g(τ) = c e^{-κτ}
                let c = 0.5 * lead.gamma * lead.bandwidth;
                let kappa = C64::new(lead.bandwidth, lead.mu);
                let (e0, e1) = hat_moments(-kappa * dt);
                let step = (-kappa * dt).exp();
                let mut decay = C64::new(c * dt, 0.0);
                for m in 0..=n {
                    if m % 256 == 0 {
                        decay = c * dt * (-kappa * (m as f64 * dt)).exp();
                    }
                    left[m][l] = decay * (e0 - e1);
                    right[m][l] = decay * e1;
                    decay *= step;
                }
            }
        }
        Ok(Self { left, right })
    }
}

/// Solve the Dyson equation on `grid`; returns U(t_k) for k = 0..=n_steps.
pub fn solve_dyson(config: &ModelConfig, grid: TimeGrid) -> Result<Vec<ComplexMat2>> {
    config.validate()?;
    let model = SpectralModel::from(config);
    if model.kind == SpectralKind::WideBand {
        return Err(Error::Unsupported("Volterra solve with a delta-function kernel; use wbl_greens"));
    }
    let dt = grid.dt();
    let n = grid.n_steps;
    let m_mat = config.hamiltonian();
    if dt * m_mat.op_norm() > MAX_PHASE_PER_STEP {
        return Err(Error::Solver(format!(
            "time step {dt} too large for |M| = {:.3}; reduce dt",
            m_mat.op_norm()
        )));
    }
    let w = MemoryWeights::build(&model, dt, n)?;
    let i_m = m_mat.scale(C64::new(0.0, 1.0));
    let half = 0.5 * dt;
    let lhs = ComplexMat2::identity() + (i_m + ComplexMat2::diag(w.left[0][0], w.left[0][1])).scale_re(half);
    let lhs_inv = lhs
        .inverse()
        .ok_or_else(|| Error::Solver("implicit step matrix is singular; reduce dt".into()))?;

    let mut u: Vec<ComplexMat2> = Vec::with_capacity(n + 1);
    u.push(ComplexMat2::identity());
    // memory integral F at the previous step
    let mut f_prev = ComplexMat2::zero();
    for step in 1..=n {
        // R_n = Σ_{k<n} diag(right[n-1-k] + [k≥1] left[n-k]) U_k
        let mut rest = diag_mul(w.right[step - 1], &u[0]);
        for (k, uk) in u.iter().enumerate().skip(1) {
            let r = w.right[step - 1 - k];
            let l = w.left[step - k];
            rest += diag_mul([r[0] + l[0], r[1] + l[1]], uk);
        }
        let prev = u[step - 1];
        let deriv_prev = -(i_m * prev) - f_prev;
        let rhs = prev + deriv_prev.scale_re(half) - rest.scale_re(half);
        let next = lhs_inv * rhs;
        if !next.is_finite() {
            return Err(Error::Solver(format!("non-finite propagator at t = {}", grid.time(step))));
        }
        f_prev = diag_mul(w.left[0], &next) + rest;
        u.push(next);
    }
    Ok(u)
}
