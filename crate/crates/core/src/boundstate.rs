//! Dissipationless dynamics: real roots of `det[ωI − M − Σ(ω)]` outside the
//! reservoir bands, and the relaxation scenario they imply.

use crate::error::{Error, Result};
use crate::model::{ComplexMat2, ModelConfig, SpectralKind};
use crate::spectral::{lead_self_energy, lead_self_energy_derivative, SpectralModel};

/// Roots closer than this to a band edge are not effective.
pub const MIN_EDGE_DISTANCE: f64 = 1e-3;
/// Roots whose residue norm is below this are not effective.
pub const MIN_RESIDUE_NORM: f64 = 1e-6;
/// Scan step for sign changes.
pub const SCAN_STEP: f64 = 1e-3;
/// Bisection bracket width.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundStateRoot {
    pub energy: f64,
    /// Residue Z of the dot propagator at the root.
    pub residue_weight: ComplexMat2,
    /// Distance to the nearest band edge.
    pub edge_distance: f64,
}

impl BoundStateRoot {
    /// Weight of the localized state on the two dots, `tr Z`.
    pub fn dot_weight(&self) -> f64 {
        self.residue_weight.trace().re
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelaxationKind {
    ThermalLike,
    QuantumMemory,
    OscillatingQuantumMemory,
}

impl std::fmt::Display for RelaxationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ThermalLike => "thermal_like",
            Self::QuantumMemory => "quantum_memory",
            Self::OscillatingQuantumMemory => "oscillating_quantum_memory",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelaxationClass {
    pub kind: RelaxationKind,
    pub effective_roots: usize,
}

/// Bands of both leads as closed intervals; a lead with Γ = 0 has none.
fn bands(config: &ModelConfig) -> Vec<(f64, f64)> {
    config
        .leads()
        .iter()
        .filter(|l| l.gamma > 0.0)
        .map(|l| l.band())
        .collect()
}

fn check_outside(config: &ModelConfig, omega: f64) -> Result<()> {
    match config.spectral_kind {
        SpectralKind::Lorentzian | SpectralKind::WideBand => {
            if config.left.gamma > 0.0 || config.right.gamma > 0.0 {
                return Err(Error::InsideBand("criterion: the spectrum covers the real axis", omega));
            }
        }
        SpectralKind::CutoffLorentzian => {
            if bands(config).iter().any(|&(a, b)| omega >= a && omega <= b) {
                return Err(Error::InsideBand("criterion", omega));
            }
        }
    }
    Ok(())
}

/// Σ and Σ' outside the bands; zero for switched-off leads.
fn outside_self_energy(config: &ModelConfig, model: &SpectralModel, omega: f64) -> Result<([f64; 2], [f64; 2])> {
    let mut sig = [0.0; 2];
    let mut dsig = [0.0; 2];
    if config.spectral_kind == SpectralKind::CutoffLorentzian {
        for l in 0..2 {
            if config.leads()[l].gamma > 0.0 {
                sig[l] = lead_self_energy(model, l, omega)?;
                dsig[l] = lead_self_energy_derivative(model, l, omega)?;
            }
        }
    }
    Ok((sig, dsig))
}

/// `det[ωI − M − Σ(ω)]`, real outside every band.
pub fn criterion(config: &ModelConfig, omega: f64) -> Result<f64> {
    check_outside(config, omega)?;
    let model = SpectralModel::from(config);
    let (sig, _) = outside_self_energy(config, &model, omega)?;
    let s = &config.system;
    Ok((omega - s.eps1 - sig[0]) * (omega - s.eps2 - sig[1]) - s.g_coupling.norm_sqr())
}

fn residue(config: &ModelConfig, model: &SpectralModel, omega: f64) -> Result<ComplexMat2> {
    let (sig, dsig) = outside_self_energy(config, model, omega)?;
    let s = &config.system;
    let a1 = omega - s.eps1 - sig[0];
    let a2 = omega - s.eps2 - sig[1];
    let dprime = (1.0 - dsig[0]) * a2 + a1 * (1.0 - dsig[1]);
    let k = ComplexMat2::diag_real(a1, a2) - ComplexMat2::new(0.0.into(), s.g_coupling, s.g_coupling.conj(), 0.0.into());
    Ok(k.adjugate().scale_re(1.0 / dprime))
}

/// Out-of-band intervals to scan, each `(lo, hi)` open at band edges.
fn scan_intervals(config: &ModelConfig) -> Vec<(f64, f64)> {
    let mut bands = bands(config);
    bands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in bands {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    let s = &config.system;
    let gmax = config.left.gamma.max(config.right.gamma);
    let reach = s.eps1.abs().max(s.eps2.abs()) + s.g_coupling.norm() + 10.0 * (1.0 + gmax);
    let (Some(first), Some(last)) = (merged.first().copied(), merged.last().copied()) else {
        return vec![(-reach, reach)];
    };
    let mut out = vec![((first.0 - reach).min(-reach), first.0)];
    for w in merged.windows(2) {
        out.push((w[0].1, w[1].0));
    }
    out.push((last.1, (last.1 + reach).max(reach)));
    out
}

fn edge_distance(config: &ModelConfig, omega: f64) -> f64 {
    bands(config)
        .iter()
        .flat_map(|&(a, b)| [(omega - a).abs(), (omega - b).abs()])
        .fold(f64::INFINITY, f64::min)
}

/// Every effective bound state of a cutoff-Lorentzian configuration, sorted by energy.
pub fn find_bound_states(config: &ModelConfig) -> Vec<BoundStateRoot> {
    if config.spectral_kind != SpectralKind::CutoffLorentzian {
        return Vec::new();
    }
    let model = SpectralModel::from(config);
    let f = |w: f64| criterion(config, w).ok();
    let mut roots = Vec::new();
    for (lo, hi) in scan_intervals(config) {
        let (a, b) = (lo + SCAN_STEP, hi - SCAN_STEP);
        if b <= a {
            continue;
        }
        let n = ((b - a) / SCAN_STEP).ceil() as usize;
        let h = (b - a) / n as f64;
        let mut x0 = a;
        let Some(mut f0) = f(x0) else { continue };
        for i in 1..=n {
            let x1 = if i == n { b } else { a + i as f64 * h };
            let Some(f1) = f(x1) else { break };
            if f0 == 0.0 || f0.signum() != f1.signum() {
                let root = if f0 == 0.0 { x0 } else { bisect(&f, x0, x1, f0) };
                roots.push(root);
            }
            x0 = x1;
            f0 = f1;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 2.0 * ROOT_TOL);
    roots
        .into_iter()
        .filter_map(|e| {
            let z = residue(config, &model, e).ok()?;
            let root = BoundStateRoot { energy: e, residue_weight: z, edge_distance: edge_distance(config, e) };
            (root.edge_distance >= MIN_EDGE_DISTANCE && z.max_abs() >= MIN_RESIDUE_NORM).then_some(root)
        })
        .collect()
}

fn bisect(f: &impl Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let Some(fm) = f(mid) else { break };
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn classify_relaxation(roots: &[BoundStateRoot]) -> RelaxationClass {
    let kind = match roots.len() {
        0 => RelaxationKind::ThermalLike,
        1 => RelaxationKind::QuantumMemory,
        _ => RelaxationKind::OscillatingQuantumMemory,
    };
    RelaxationClass { kind, effective_roots: roots.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReservoirParams, SystemParams};

    fn cutoff_config(eps: f64, g: f64, gamma: f64, cut: f64) -> ModelConfig {
        let lead = ReservoirParams::lorentzian(gamma, 1.0, 0.0, 0.1).with_cutoff(cut);
        ModelConfig::symmetric(SpectralKind::CutoffLorentzian, eps, g, lead)
    }

    #[test]
    fn weak_coupling_roots_sit_at_hamiltonian_eigenvalues() {
        let cfg = cutoff_config(4.0, 1.0, 1e-6, 1.0);
        let roots = find_bound_states(&cfg);
        assert_eq!(roots.len(), 2);
        assert!((roots[0].energy - 3.0).abs() < 1e-5);
        assert!((roots[1].energy - 5.0).abs() < 1e-5);
        for r in &roots {
            assert!((r.dot_weight() - 1.0).abs() < 1e-4);
        }
        assert_eq!(classify_relaxation(&roots).kind, RelaxationKind::OscillatingQuantumMemory);
    }

    #[test]
    fn lorentzian_has_no_admissible_frequency() {
        let lead = ReservoirParams::lorentzian(1.0, 1.0, 0.0, 0.1);
        let cfg = ModelConfig::symmetric(SpectralKind::Lorentzian, 2.0, 0.5, lead);
        assert!(matches!(criterion(&cfg, 100.0), Err(Error::InsideBand(..))));
        assert!(find_bound_states(&cfg).is_empty());
        assert_eq!(classify_relaxation(&[]).kind, RelaxationKind::ThermalLike);
    }

    #[test]
    fn rejects_inside_band() {
        let cfg = cutoff_config(4.0, 1.0, 1.0, 2.0);
        assert!(criterion(&cfg, 1.0).is_err());
        assert!(criterion(&cfg, 2.5).is_ok());
    }

    #[test]
    fn far_field_is_the_bare_parabola() {
        let mut cfg = cutoff_config(0.0, 0.5, 1.0, 2.0);
        cfg.system = SystemParams::new(1.0, 3.0, 0.5);
        for w in [1e4, -1e4] {
            let bare = w * w - 4.0 * w + 3.0 - 0.25;
            let c = criterion(&cfg, w).unwrap();
            assert!(((c - bare) / bare).abs() < 1e-4);
        }
    }

    #[test]
    fn roots_satisfy_criterion_and_carry_positive_weight() {
        let cfg = cutoff_config(3.0, 0.5, 1.0, 1.0);
        let roots = find_bound_states(&cfg);
        assert!(!roots.is_empty());
        for r in &roots {
            assert!(criterion(&cfg, r.energy).unwrap().abs() < 1e-9);
            assert!(r.residue_weight.is_hermitian(1e-12));
            let (lo, _) = r.residue_weight.hermitian_eigenvalues();
            assert!(lo > -1e-12 && r.dot_weight() <= 1.0 + 1e-12);
            assert!(r.edge_distance >= MIN_EDGE_DISTANCE);
        }
    }

    #[test]
    fn residue_matches_finite_difference_of_criterion() {
        let mut cfg = cutoff_config(3.0, 0.0, 1.0, 1.0);
        cfg.system = SystemParams::new(3.0, 5.0, 0.0);
        let roots = find_bound_states(&cfg);
        // G = 0: Z₁₁ = 1/(1 − Σ₁'(E)) at the root
        let e = roots[0].energy;
        let h = 1e-6;
        let m = SpectralModel::from(&cfg);
        let s = |w: f64| criterion(&cfg, w).unwrap() / (w - 5.0 - lead_self_energy(&m, 1, w).unwrap());
        let dfd = (s(e + h) - s(e - h)) / (2.0 * h);
        assert!((roots[0].residue_weight.a().re - 1.0 / dfd).abs() < 1e-6);
    }

    #[test]
    fn classification_by_count() {
        let r = BoundStateRoot { energy: 0.0, residue_weight: ComplexMat2::identity(), edge_distance: 1.0 };
        assert_eq!(classify_relaxation(&[r]).kind, RelaxationKind::QuantumMemory);
        assert_eq!(classify_relaxation(&[r, r, r]).effective_roots, 3);
    }
}
