//! Reservoir spectral densities, Fermi occupations, real self-energies and
//! the time-domain memory / noise kernels.
//!
//! Everything here is diagonal in the lead index: lead L couples only to
//! dot 1 and lead R only to dot 2, so matrix-valued quantities are returned
//! as `[f64; 2]` diagonals or diagonal [`ComplexMat2`]s.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{ComplexMat2, ModelConfig, ReservoirParams, SpectralKind};
use crate::quad::{breakpoints_within, PanelRule};

/// Gauss points per panel in frequency grids.
pub const PANEL_ORDER: usize = 8;

/// Spectral model of both leads.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralModel {
    pub kind: SpectralKind,
    pub leads: [ReservoirParams; 2],
}

impl From<&ModelConfig> for SpectralModel {
    fn from(cfg: &ModelConfig) -> Self {
        Self { kind: cfg.spectral_kind, leads: [cfg.left, cfg.right] }
    }
}

impl SpectralModel {
    pub fn new(kind: SpectralKind, left: ReservoirParams, right: ReservoirParams) -> Self {
        Self { kind, leads: [left, right] }
    }

    /// Whether lead `l` has a finite hard cutoff in effect.
    pub fn has_cutoff(&self, l: usize) -> bool {
        self.kind == SpectralKind::CutoffLorentzian && self.leads[l].cutoff.is_finite()
    }

    /// J_l(ω) for one lead.
    pub fn lead_density(&self, l: usize, omega: f64) -> f64 {
        let lead = &self.leads[l];
        match self.kind {
            SpectralKind::WideBand => lead.gamma,
            SpectralKind::Lorentzian => lorentzian(lead, omega),
            SpectralKind::CutoffLorentzian => {
                if (omega - lead.mu).abs() > lead.cutoff {
                    0.0
                } else {
                    lorentzian(lead, omega)
                }
            }
        }
    }

    /// Support of J_l: the band for cutoff spectra, the whole axis otherwise.
    pub fn support(&self, l: usize) -> (f64, f64) {
        if self.has_cutoff(l) {
            self.leads[l].band()
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    /// Whether ω lies outside every lead's band (all J_l(ω) = 0).
    pub fn outside_all_bands(&self, omega: f64) -> bool {
        (0..2).all(|l| {
            let (lo, hi) = self.support(l);
            omega < lo || omega > hi
        })
    }
}

fn lorentzian(lead: &ReservoirParams, omega: f64) -> f64 {
    let x = omega - lead.mu;
    let d = lead.bandwidth;
    lead.gamma * d * d / (x * x + d * d)
}

/// Diagonal of the spectral-density matrix, `[J_L(ω), J_R(ω)]`.
pub fn spectral_density(model: &SpectralModel, omega: f64) -> [f64; 2] {
    [model.lead_density(0, omega), model.lead_density(1, omega)]
}

/// Fermi–Dirac occupation `1/(e^{(ω−μ)/k_T} + 1)`; a step with value ½ at
/// ω = μ when `k_t == 0`.
pub fn fermi_occupation(omega: f64, mu: f64, k_t: f64) -> f64 {
    let x = omega - mu;
    if k_t == 0.0 {
        return if x < 0.0 {
            1.0
        } else if x > 0.0 {
            0.0
        } else {
            0.5
        };
    }
    let y = x / k_t;
    if y > 0.0 {
        let e = (-y).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + y.exp())
    }
}

/// Real part of the self-energy, the principal value
/// `∫ dω′ J_l(ω′) / (2π(ω − ω′))`, per lead.
///
/// Cutoff spectra only admit evaluation strictly outside the band of every
/// lead that carries a cutoff.
pub fn self_energy_real(model: &SpectralModel, omega: f64) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (l, slot) in out.iter_mut().enumerate() {
        *slot = lead_self_energy(model, l, omega)?;
    }
    Ok(out)
}

pub(crate) fn lead_self_energy(model: &SpectralModel, l: usize, omega: f64) -> Result<f64> {
    let lead = &model.leads[l];
    let y = omega - lead.mu;
    let d = lead.bandwidth;
    match model.kind {
        SpectralKind::WideBand => Ok(0.0),
        _ if !model.has_cutoff(l) => Ok(lead.gamma * d * y / (2.0 * (d * d + y * y))),
        _ => {
            let cut = lead.cutoff;
            if y.abs() <= cut {
                return Err(Error::InsideBand("cutoff self-energy", omega));
            }
            let pref = lead.gamma * d * d / (2.0 * PI * (y * y + d * d));
            let log = ((y + cut) / (y - cut)).ln();
            Ok(pref * (log + 2.0 * y / d * (cut / d).atan()))
        }
    }
}

/// dΣ_l/dω outside the band (cutoff) or anywhere (Lorentzian).
pub fn self_energy_derivative(model: &SpectralModel, omega: f64) -> Result<[f64; 2]> {
    Ok([lead_self_energy_derivative(model, 0, omega)?, lead_self_energy_derivative(model, 1, omega)?])
}

pub(crate) fn lead_self_energy_derivative(model: &SpectralModel, l: usize, omega: f64) -> Result<f64> {
    let lead = &model.leads[l];
    let y = omega - lead.mu;
    let d = lead.bandwidth;
    let r2 = y * y + d * d;
    Ok(match model.kind {
        SpectralKind::WideBand => 0.0,
        _ if !model.has_cutoff(l) => lead.gamma * d * (d * d - y * y) / (2.0 * r2 * r2),
        _ => {
            let cut = lead.cutoff;
            if y.abs() <= cut {
                return Err(Error::InsideBand("cutoff self-energy derivative", omega));
            }
            let c = lead.gamma * d * d / (2.0 * PI * r2);
            let dc = -2.0 * y * c / r2;
            let atan = (cut / d).atan();
            let log = ((y + cut) / (y - cut)).ln();
            let dlog = -2.0 * cut / (y * y - cut * cut);
            dc * (log + 2.0 * y * atan / d) + c * (dlog + 2.0 * atan / d)
        }
    })
}

/// Half-width of the frequency window used for noise-type integrals around μ_l.
pub fn noise_half_width(lead: &ReservoirParams) -> f64 {
    let w = 10.0 * lead.bandwidth + 20.0 * lead.k_t;
    // Beyond ~200 d the Fermi factor is flat to O(d/k_T) and J ~ d²/x² is negligible.
    w.min(200.0 * lead.bandwidth.max(1.0)).min(lead.cutoff)
}

/// Frequency panel width suited to a lead for Fourier integrals up to `tau_max`.
pub fn panel_width(lead: &ReservoirParams, tau_max: f64) -> f64 {
    let osc = if tau_max > 0.0 { PI / (2.0 * tau_max) } else { f64::INFINITY };
    osc.min(lead.bandwidth / 4.0).min(0.25)
}

/// Composite rule on `[lo, hi]` for lead `l`, refined to `k_T/2` within 20 k_T of the Fermi edge.
pub fn lead_rule(lead: &ReservoirParams, lo: f64, hi: f64, tau_max: f64, extra: &[f64]) -> PanelRule {
    let base = panel_width(lead, tau_max);
    let edge = 20.0 * lead.k_t;
    let fine = (lead.k_t / 2.0).max(1e-3);
    let mut pts = vec![lead.mu, lead.mu - edge, lead.mu + edge];
    pts.extend_from_slice(extra);
    let bps = breakpoints_within(lo, hi, pts);
    PanelRule::build(&bps, PANEL_ORDER, |a, b| {
        let mid = 0.5 * (a + b);
        if lead.k_t > 0.0 && (mid - lead.mu).abs() < edge {
            base.min(fine)
        } else {
            base
        }
    })
}

/// `Σ_ν a_ν e^{−i ω_ν m dt}` for m = 0..=n, by phase recurrence with
/// periodic exact re-seeding.
pub(crate) fn fourier_series_table(nodes: &[f64], amps: &[C64], dt: f64, n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n + 1];
    let steps: Vec<C64> = nodes.iter().map(|&w| C64::from_polar(1.0, -w * dt)).collect();
    let mut phase: Vec<C64> = vec![C64::new(1.0, 0.0); nodes.len()];
    for (m, slot) in out.iter_mut().enumerate() {
        if m > 0 && m % 128 == 0 {
            for (p, &w) in phase.iter_mut().zip(nodes) {
                *p = C64::from_polar(1.0, -w * dt * m as f64);
            }
        }
        let mut acc = C64::new(0.0, 0.0);
        for (p, a) in phase.iter().zip(amps) {
            acc += p * a;
        }
        *slot = acc;
        for (p, s) in phase.iter_mut().zip(&steps) {
            *p *= s;
        }
    }
    out
}

/// Memory kernel `g(τ) = Σ_l ∫ dω/2π J_l(ω) e^{−iωτ}`, diagonal.
///
/// The Lorentzian uses the closed form `(Γd/2) e^{−iμτ − d|τ|}`; the cutoff
/// Lorentzian is integrated over its band. The wide-band kernel is a Dirac
/// delta and is rejected here.
pub fn memory_kernel(model: &SpectralModel, tau: f64) -> Result<ComplexMat2> {
    let mut diag = [C64::new(0.0, 0.0); 2];
    for (l, slot) in diag.iter_mut().enumerate() {
        *slot = lead_memory_kernel(model, l, tau)?;
    }
    Ok(ComplexMat2::diag(diag[0], diag[1]))
}

fn lead_memory_kernel(model: &SpectralModel, l: usize, tau: f64) -> Result<C64> {
    let lead = &model.leads[l];
    match model.kind {
        SpectralKind::WideBand => Err(Error::Unsupported("tabulated wide-band memory kernel")),
        _ if !model.has_cutoff(l) => Ok(lorentzian_kernel(lead, tau)),
        _ => {
            let (lo, hi) = lead.band();
            let rule = lead_rule(&ReservoirParams { k_t: 0.0, ..*lead }, lo, hi, tau.abs(), &[]);
            Ok(rule.integrate(|w| C64::from_polar(model.lead_density(l, w) / (2.0 * PI), -w * tau)))
        }
    }
}

pub(crate) fn lorentzian_kernel(lead: &ReservoirParams, tau: f64) -> C64 {
    let c = 0.5 * lead.gamma * lead.bandwidth;
    c * C64::new(-lead.bandwidth * tau.abs(), -lead.mu * tau).exp()
}

/// Noise kernel `g̃(τ) = Σ_l ∫ dω/2π J_l(ω) n̄_l(ω) e^{−iωτ}`, diagonal.
///
/// For the plain Lorentzian the slowly decaying tails are handled by writing
/// `J n̄ = J/2 + J (n̄ − ½)` and using the closed form for the first term.
pub fn noise_kernel(model: &SpectralModel, tau: f64) -> Result<ComplexMat2> {
    noise_kernel_with(model, tau, 1.0)
}

/// Same as [`noise_kernel`] with panel widths scaled by `refine` (< 1 is finer).
pub fn noise_kernel_with(model: &SpectralModel, tau: f64, refine: f64) -> Result<ComplexMat2> {
    if model.kind == SpectralKind::WideBand {
        return Err(Error::Unsupported("tabulated wide-band noise kernel"));
    }
    let mut diag = [C64::new(0.0, 0.0); 2];
    for (l, slot) in diag.iter_mut().enumerate() {
        let rule = noise_rule(model, l, tau.abs(), refine);
        let (amps, closed) = noise_amplitudes(model, l, &rule);
        let series: C64 = rule.nodes.iter().zip(&amps).map(|(&w, a)| a * C64::from_polar(1.0, -w * tau)).sum();
        *slot = series + if closed { 0.5 * lorentzian_kernel(&model.leads[l], tau) } else { C64::new(0.0, 0.0) };
    }
    Ok(ComplexMat2::diag(diag[0], diag[1]))
}

fn noise_rule(model: &SpectralModel, l: usize, tau_max: f64, refine: f64) -> PanelRule {
    let lead = &model.leads[l];
    let w = noise_half_width(lead);
    let (mut lo, mut hi) = (lead.mu - w, lead.mu + w);
    if model.has_cutoff(l) {
        let (a, b) = lead.band();
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let base = panel_width(lead, tau_max) * refine;
    let fine = (lead.k_t / 2.0).max(1e-3) * refine;
    let edge = 20.0 * lead.k_t;
    let bps = breakpoints_within(lo, hi, [lead.mu, lead.mu - edge, lead.mu + edge]);
    PanelRule::build(&bps, PANEL_ORDER, |a, b| {
        let mid = 0.5 * (a + b);
        if lead.k_t > 0.0 && (mid - lead.mu).abs() < edge {
            base.min(fine)
        } else {
            base
        }
    })
}

/// Node amplitudes of the numerically integrated part of g̃ for lead `l`,
/// and whether the closed-form `g/2` part must be added.
fn noise_amplitudes(model: &SpectralModel, l: usize, rule: &PanelRule) -> (Vec<C64>, bool) {
    let lead = &model.leads[l];
    let split = !model.has_cutoff(l);
    let amps = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&w, &wt)| {
            let n = fermi_occupation(w, lead.mu, lead.k_t);
            let occ = if split { n - 0.5 } else { n };
            C64::new(wt * model.lead_density(l, w) * occ / (2.0 * PI), 0.0)
        })
        .collect();
    (amps, split)
}

/// Tabulated kernels on a uniform τ grid, τ_m = m·dt, m = 0..=n.
#[derive(Clone, Debug)]
pub struct KernelTable {
    pub dt: f64,
    pub memory: Vec<ComplexMat2>,
    pub noise: Vec<ComplexMat2>,
}

impl KernelTable {
    pub fn build(model: &SpectralModel, dt: f64, n: usize) -> Result<Self> {
        if model.kind == SpectralKind::WideBand {
            return Err(Error::Unsupported("tabulated wide-band kernels"));
        }
        let tau_max = dt * n as f64;
        let mut mem = [vec![], vec![]];
        let mut noise = [vec![], vec![]];
        for l in 0..2 {
            let lead = &model.leads[l];
            mem[l] = if model.has_cutoff(l) {
                let (lo, hi) = lead.band();
                let rule = lead_rule(&ReservoirParams { k_t: 0.0, ..*lead }, lo, hi, tau_max, &[]);
                let amps: Vec<C64> = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&w, &wt)| C64::new(wt * model.lead_density(l, w) / (2.0 * PI), 0.0))
                    .collect();
                fourier_series_table(&rule.nodes, &amps, dt, n)
            } else {
                (0..=n).map(|m| lorentzian_kernel(lead, m as f64 * dt)).collect()
            };
            let rule = noise_rule(model, l, tau_max, 1.0);
            let (amps, closed) = noise_amplitudes(model, l, &rule);
            let mut table = fourier_series_table(&rule.nodes, &amps, dt, n);
            if closed {
                for (m, v) in table.iter_mut().enumerate() {
                    *v += 0.5 * lorentzian_kernel(lead, m as f64 * dt);
                }
            }
            noise[l] = table;
        }
        let zip = |t: &[Vec<C64>; 2]| -> Vec<ComplexMat2> {
            t[0].iter().zip(&t[1]).map(|(&a, &b)| ComplexMat2::diag(a, b)).collect()
        };
        Ok(Self { dt, memory: zip(&mem), noise: zip(&noise) })
    }

    /// g(τ_m) for m ≥ 0 and g(−τ_m) = g(τ_m)† for negative offsets.
    pub fn memory_at(&self, m: isize) -> ComplexMat2 {
        if m >= 0 {
            self.memory[m as usize]
        } else {
            self.memory[(-m) as usize].adjoint()
        }
    }

    pub fn noise_at(&self, m: isize) -> ComplexMat2 {
        if m >= 0 {
            self.noise[m as usize]
        } else {
            self.noise[(-m) as usize].adjoint()
        }
    }
}
