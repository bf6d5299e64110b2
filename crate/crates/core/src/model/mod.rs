//! Physical parameters of the double-dot model.
//!
//! Energies, rates and temperatures are in units of the reference lead
//! coupling Γ; times are in units of 1/Γ.

mod matrix;

pub use matrix::ComplexMat2;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative Hermiticity tolerance for energy matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// On-site energies and interdot tunnelling of the two dots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub eps1: f64,
    pub eps2: f64,
    pub g_coupling: C64,
}

impl SystemParams {
    pub fn new(eps1: f64, eps2: f64, g: f64) -> Self {
        Self { eps1, eps2, g_coupling: g.into() }
    }
}

/// One electron reservoir.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReservoirParams {
    /// Coupling strength Γ_l.
    pub gamma: f64,
    /// Lorentzian half-width d_l.
    pub bandwidth: f64,
    /// Chemical potential μ_l (also the band centre).
    pub mu: f64,
    /// Hard band cutoff Ω_l; `f64::INFINITY` for no cutoff.
    pub cutoff: f64,
    /// Temperature k_B T_l.
    pub k_t: f64,
}

impl ReservoirParams {
    pub fn lorentzian(gamma: f64, bandwidth: f64, mu: f64, k_t: f64) -> Self {
        Self { gamma, bandwidth, mu, cutoff: f64::INFINITY, k_t }
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("{name}: {what}")));
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be finite and >= 0");
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return bad("bandwidth d must be finite and > 0");
        }
        if !self.mu.is_finite() {
            return bad("mu must be finite");
        }
        if !(self.cutoff > 0.0) {
            return bad("cutoff must be > 0 or infinite");
        }
        if !(self.k_t >= 0.0 && self.k_t.is_finite()) {
            return bad("k_t must be finite and >= 0");
        }
        Ok(())
    }

    /// Band support `[μ − Ω, μ + Ω]`.
    pub fn band(&self) -> (f64, f64) {
        (self.mu - self.cutoff, self.mu + self.cutoff)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpectralKind {
    Lorentzian,
    CutoffLorentzian,
    WideBand,
}

impl std::str::FromStr for SpectralKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lorentzian" => Ok(Self::Lorentzian),
            "cutoff_lorentzian" | "cutoff" => Ok(Self::CutoffLorentzian),
            "wide_band" | "wbl" => Ok(Self::WideBand),
            other => Err(Error::Config(format!("unknown spectral kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for SpectralKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Lorentzian => "lorentzian",
            Self::CutoffLorentzian => "cutoff_lorentzian",
            Self::WideBand => "wide_band",
        })
    }
}

/// Dots plus two leads; lead `left` couples only to dot 1, `right` only to dot 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub system: SystemParams,
    pub left: ReservoirParams,
    pub right: ReservoirParams,
    pub spectral_kind: SpectralKind,
}

impl ModelConfig {
    /// Both dots at `eps`, both leads identical: the "complete symmetric" case.
    pub fn symmetric(kind: SpectralKind, eps: f64, g: f64, lead: ReservoirParams) -> Self {
        Self {
            system: SystemParams::new(eps, eps, g),
            left: lead,
            right: lead,
            spectral_kind: kind,
        }
    }

    pub fn leads(&self) -> [&ReservoirParams; 2] {
        [&self.left, &self.right]
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        if !(s.eps1.is_finite() && s.eps2.is_finite() && s.g_coupling.is_finite()) {
            return Err(Error::Config("system energies must be finite".into()));
        }
        self.left.validate("left lead")?;
        self.right.validate("right lead")?;
        let m = build_hamiltonian(&self.system);
        if !m.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::Config("Hamiltonian matrix is not Hermitian".into()));
        }
        Ok(())
    }

    /// Diagonal coupling matrix diag(Γ_L, Γ_R).
    pub fn gamma_matrix(&self) -> ComplexMat2 {
        ComplexMat2::diag_real(self.left.gamma, self.right.gamma)
    }

    pub fn hamiltonian(&self) -> ComplexMat2 {
        build_hamiltonian(&self.system)
    }
}

/// Single-particle Hamiltonian `M = [[ε₁, G], [G*, ε₂]]`.
pub fn build_hamiltonian(system: &SystemParams) -> ComplexMat2 {
    ComplexMat2::new(
        system.eps1.into(),
        system.g_coupling,
        system.g_coupling.conj(),
        system.eps2.into(),
    )
}
