//! Pole expansion of U(t) for Lorentzian leads and the steady-state
//! fluctuation matrix.
//!
//! With `Σ̂_l(z) = a_l/p_l(z)`, `p_l = z − μ_l + i d_l`, `a_l = Γ_l d_l/2`,
//! clearing denominators in `det[zI − M − Σ̂(z)]` gives a quartic `D(z)`;
//! its roots are the poles of the resolvent and
//! `U(t) = Σ_j Z_j e^{−i r_j t}` with `Z_j = N(r_j)/D'(r_j)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{ComplexMat2, ModelConfig, SpectralKind};
use crate::quad::{adaptive, AdaptiveOptions};
use crate::spectral::{fermi_occupation, self_energy_real, spectral_density, SpectralModel};

/// Relative residual above which a polynomial root is rejected as spurious.
const ROOT_RESIDUAL_TOL: f64 = 1e-8;
/// Relative size of D'(r) below which a root counts as repeated.
const DEGENERATE_TOL: f64 = 1e-7;

/// Poles `r_j` (all with Im < 0) and matrix residues `Z_j` of the resolvent.
#[derive(Clone, Debug)]
pub struct PoleExpansion {
    pub poles: Vec<C64>,
    pub residues: Vec<ComplexMat2>,
}

impl PoleExpansion {
    pub fn propagator(&self, t: f64) -> ComplexMat2 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(&r, z)| z.scale((C64::new(0.0, -t) * r).exp()))
            .sum()
    }

    /// `‖Σ_j Z_j − I‖_max`; zero for an exact expansion since U(0) = I.
    pub fn residue_sum_defect(&self) -> f64 {
        (self.residues.iter().copied().sum::<ComplexMat2>() - ComplexMat2::identity()).max_abs()
    }

    /// Retarded resolvent `Σ_j Z_j/(ω − r_j)` at real ω (up to a factor i).
    pub fn resolvent(&self, omega: f64) -> ComplexMat2 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(&r, z)| z.scale(1.0 / (omega - r)))
            .sum()
    }
}

// Polynomials as ascending coefficient vectors.
type Poly = Vec<C64>;

fn poly_mul(a: &[C64], b: &[C64]) -> Poly {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[C64], b: &[C64], sign: f64) -> Poly {
    let mut out = vec![C64::new(0.0, 0.0); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += sign * y;
    }
    out
}

fn poly_eval(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn poly_deriv(p: &[C64]) -> Poly {
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

fn linear(root: C64) -> Poly {
    vec![-root, C64::new(1.0, 0.0)]
}

/// Roots of a polynomial with non-zero leading coefficient, from the
/// companion matrix, each polished by a few Newton steps.
fn poly_roots(p: &[C64]) -> Option<Vec<C64>> {
    let deg = p.len() - 1;
    let lead = p[deg];
    let mut comp = DMatrix::<C64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    let dp = poly_deriv(p);
    let eig = comp.schur().eigenvalues()?;
    let roots = eig
        .iter()
        .map(|&r0| {
            let mut r = r0;
            for _ in 0..8 {
                let d = poly_eval(&dp, r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = poly_eval(p, r) / d;
                if !step.is_finite() {
                    break;
                }
                r -= step;
                if step.norm() <= 1e-16 * (1.0 + r.norm()) {
                    break;
                }
            }
            r
        })
        .collect();
    Some(roots)
}

/// Pole expansion of U for Lorentzian leads (no cutoff).
///
/// Fails with [`Error::Poles`] when two poles coincide (e.g. decoupled
/// identical dots), where simple residues do not exist.
pub fn pole_expansion_lorentzian(config: &ModelConfig) -> Result<PoleExpansion> {
    config.validate()?;
    if config.spectral_kind != SpectralKind::Lorentzian {
        return Err(Error::Unsupported("pole expansion requires Lorentzian leads without cutoff"));
    }
    let s = &config.system;
    let (e1, e2, g) = (s.eps1, s.eps2, s.g_coupling);
    let one = C64::new(1.0, 0.0);
    let p_of = |l: &crate::model::ReservoirParams| linear(C64::new(l.mu, -l.bandwidth));
    let (pl, pr) = (p_of(&config.left), p_of(&config.right));
    let (al, ar) = (0.5 * config.left.gamma * config.left.bandwidth, 0.5 * config.right.gamma * config.right.bandwidth);
    // f1 = (z − ε₁)p_L − a_L,  f2 = (z − ε₂)p_R − a_R
    let f1 = poly_add(&poly_mul(&linear(e1.into()), &pl), &[al.into()], -1.0);
    let f2 = poly_add(&poly_mul(&linear(e2.into()), &pr), &[ar.into()], -1.0);
    let plpr = poly_mul(&pl, &pr);
    let d_poly = poly_add(&poly_mul(&f1, &f2), &plpr.iter().map(|c| c * g.norm_sqr()).collect::<Vec<_>>(), -1.0);
    let dd = poly_deriv(&d_poly);
    let n11 = poly_mul(&f2, &pl);
    let n22 = poly_mul(&f1, &pr);

    let scale = |z: C64| (1.0 + z.norm()).powi(4) * (1.0 + e1.abs() + e2.abs() + g.norm() + al + ar);
    let mut poles = Vec::new();
    let mut residues = Vec::new();
    let roots = poly_roots(&d_poly).ok_or_else(|| Error::Poles("companion eigenvalues did not converge".into()))?;
    for r in roots {
        if poly_eval(&d_poly, r).norm() > ROOT_RESIDUAL_TOL * scale(r) {
            return Err(Error::Poles(format!("root {r} failed to converge")));
        }
        // Roots at p_l(r) = 0 with Γ_l = 0 cancel against N and are not poles of the resolvent.
        let sig_l = if config.left.gamma == 0.0 { C64::new(0.0, 0.0) } else { al / poly_eval(&pl, r) };
        let sig_r = if config.right.gamma == 0.0 { C64::new(0.0, 0.0) } else { ar / poly_eval(&pr, r) };
        let det = (r - e1 - sig_l) * (r - e2 - sig_r) - g.norm_sqr();
        if !det.is_finite() || det.norm() > ROOT_RESIDUAL_TOL.sqrt() * (1.0 + r.norm()).powi(2) {
            continue;
        }
        let dprime = poly_eval(&dd, r);
        if dprime.norm() < DEGENERATE_TOL * scale(r) / (1.0 + r.norm()) {
            return Err(Error::Poles(format!("repeated pole near {r}")));
        }
        if r.im >= 0.0 {
            return Err(Error::Poles(format!("pole {r} not in the lower half-plane")));
        }
        let prod = poly_eval(&plpr, r);
        let z = ComplexMat2::new(poly_eval(&n11, r), g * prod, g.conj() * prod, poly_eval(&n22, r)).scale(one / dprime);
        poles.push(r);
        residues.push(z);
    }
    let expansion = PoleExpansion { poles, residues };
    if expansion.residue_sum_defect() > 1e-6 {
        return Err(Error::Poles(format!(
            "residues sum to I only within {:e}",
            expansion.residue_sum_defect()
        )));
    }
    Ok(expansion)
}

/// Frequencies where the steady-state integrand changes character.
fn steady_breakpoints(config: &ModelConfig, extra: &[f64]) -> Vec<f64> {
    let mut bps = Vec::new();
    for lead in config.leads() {
        bps.push(lead.mu);
        if lead.k_t > 0.0 {
            bps.extend([lead.mu - 20.0 * lead.k_t, lead.mu + 20.0 * lead.k_t]);
        }
        if config.spectral_kind != SpectralKind::WideBand {
            bps.extend([lead.mu - lead.bandwidth, lead.mu + lead.bandwidth]);
        }
        if config.spectral_kind == SpectralKind::CutoffLorentzian {
            let (a, b) = lead.band();
            bps.extend([a, b]);
        }
    }
    bps.extend_from_slice(extra);
    bps
}

fn steady_options() -> AdaptiveOptions {
    AdaptiveOptions { abs_tol: 1e-11, rel_tol: 1e-10, max_intervals: 20000 }
}

/// `V^s = Σ_l ∫ dω/2π J_l n_l ũ e_l e_l† ũ†` with `ũ = Σ_k Z_k/(ω − r_k)`.
pub fn steady_state_fluctuation(expansion: &PoleExpansion, config: &ModelConfig) -> Result<ComplexMat2> {
    let model = SpectralModel::from(config);
    let extra: Vec<f64> = expansion.poles.iter().map(|r| r.re).collect();
    integrate_steady(config, &model, &extra, |w| expansion.resolvent(w))
}

/// V^s from the resolvent `(ω − M − Δ(ω) + iJ(ω)/2)^{-1}` directly; valid for
/// every spectral kind and when the pole expansion is degenerate. Bound
/// states are not included: their weight never reaches the steady state.
pub fn steady_state_fluctuation_resolvent(config: &ModelConfig) -> Result<ComplexMat2> {
    config.validate()?;
    let model = SpectralModel::from(config);
    let m = config.hamiltonian();
    let (lo, hi) = m.hermitian_eigenvalues();
    let resolvent = |w: f64| -> ComplexMat2 {
        let j = spectral_density(&model, w);
        let delta = if config.spectral_kind == SpectralKind::CutoffLorentzian {
            cutoff_principal_part(&model, w)
        } else {
            self_energy_real(&model, w).unwrap_or([0.0; 2])
        };
        let k = ComplexMat2::diag(C64::new(w - delta[0], 0.5 * j[0]), C64::new(w - delta[1], 0.5 * j[1])) - m;
        k.inverse().unwrap_or_else(ComplexMat2::zero)
    };
    integrate_steady(config, &model, &[lo, hi], resolvent)
}

/// Σ_l(ω) everywhere for the cutoff Lorentzian: closed form outside the band,
/// the same expression with |·| inside the logarithm inside it.
fn cutoff_principal_part(model: &SpectralModel, w: f64) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (l, slot) in out.iter_mut().enumerate() {
        let lead = &model.leads[l];
        let (y, d, cut) = (w - lead.mu, lead.bandwidth, lead.cutoff);
        let pref = lead.gamma * d * d / (2.0 * PI * (y * y + d * d));
        let log = ((y + cut) / (y - cut)).abs().ln();
        *slot = pref * (log + 2.0 * y / d * (cut / d).atan());
    }
    out
}

fn integrate_steady(
    config: &ModelConfig,
    model: &SpectralModel,
    extra: &[f64],
    resolvent: impl Fn(f64) -> ComplexMat2,
) -> Result<ComplexMat2> {
    let bps = steady_breakpoints(config, extra);
    let leads = config.leads();
    let integrand = |w: f64| -> ComplexMat2 {
        let g = resolvent(w);
        let j = spectral_density(model, w);
        let mut acc = ComplexMat2::zero();
        for l in 0..2 {
            let weight = j[l] * fermi_occupation(w, leads[l].mu, leads[l].k_t) / (2.0 * PI);
            if weight == 0.0 {
                continue;
            }
            let (c0, c1) = (g[(0, l)], g[(1, l)]);
            acc += ComplexMat2::new(
                c0 * c0.conj(),
                c0 * c1.conj(),
                c1 * c0.conj(),
                c1 * c1.conj(),
            )
            .scale_re(weight);
        }
        acc
    };
    let r = adaptive(integrand, f64::NEG_INFINITY, f64::INFINITY, &bps, steady_options());
    if !r.converged && r.error > 1e-7 {
        return Err(Error::Solver(format!("steady-state quadrature did not converge (error {:e})", r.error)));
    }
    let v = r.value;
    // symmetrise away rounding
    Ok((v + v.adjoint()).scale_re(0.5))
}
