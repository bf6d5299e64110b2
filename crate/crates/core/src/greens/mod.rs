//! Nonequilibrium Green's functions of the dots: the retarded propagator
//! U(t) from the Dyson integro-differential equation and the fluctuation
//! matrix V(t), together with the pole expansion for Lorentzian leads and
//! the wide-band / Born–Markov limits.

mod fluctuation;
mod markov;
mod poles;
mod volterra;

pub use fluctuation::{compute_fluctuation, fluctuation_window};
pub use markov::{bm_fluctuation, bm_steady_state, wbl_greens, wbl_steady_state};
pub use poles::{
    pole_expansion_lorentzian, steady_state_fluctuation, steady_state_fluctuation_resolvent, PoleExpansion,
};
pub use volterra::{solve_dyson, MemoryWeights};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{ComplexMat2, ModelConfig, SpectralKind};

/// Default solver step, 1/Γ units.
pub const DEFAULT_DT: f64 = 0.005;

/// Uniform time grid `t_k = k·t_max/n_steps`, k = 0..=n_steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) || n_steps == 0 {
            return Err(Error::Config(format!("invalid time grid: t_max = {t_max}, n_steps = {n_steps}")));
        }
        Ok(Self { t_max, n_steps })
    }

    /// Grid with step as close to `dt` as divides `t_max` evenly.
    pub fn with_step(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("invalid time step {dt}")));
        }
        Self::new(t_max, (t_max / dt).round().max(1.0) as usize)
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|k| self.time(k))
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// U(t) and V(t) sampled on a grid.
#[derive(Clone, Debug)]
pub struct GreensSolution {
    pub grid: TimeGrid,
    pub u_seq: Vec<ComplexMat2>,
    pub v_seq: Vec<ComplexMat2>,
}

/// Tolerances for [`GreensSolution::check_invariants`].
pub const V_HERMITIAN_TOL: f64 = 1e-8;
pub const V_SPECTRUM_TOL: f64 = 1e-8;
pub const U_CONTRACTION_TOL: f64 = 1e-6;

impl GreensSolution {
    /// Verify U(0) = I, V(0) = 0, Hermitian V with spectrum in [0, 1] and a
    /// contractive U at every sample.
    pub fn check_invariants(&self) -> Result<()> {
        if self.u_seq.first() != Some(&ComplexMat2::identity()) {
            return Err(Error::Invariant("U(0) != I".into()));
        }
        if self.v_seq.first() != Some(&ComplexMat2::zero()) {
            return Err(Error::Invariant("V(0) != 0".into()));
        }
        for (k, (u, v)) in self.u_seq.iter().zip(&self.v_seq).enumerate() {
            let t = self.grid.time(k);
            if !u.is_finite() || !v.is_finite() {
                return Err(Error::Invariant(format!("non-finite Green's function at t = {t}")));
            }
            if v.hermiticity_defect() > V_HERMITIAN_TOL {
                return Err(Error::Invariant(format!("V not Hermitian at t = {t}")));
            }
            let (lo, hi) = v.hermitian_eigenvalues();
            if lo < -V_SPECTRUM_TOL || hi > 1.0 + V_SPECTRUM_TOL {
                return Err(Error::Invariant(format!("V spectrum [{lo:e}, {hi}] outside [0,1] at t = {t}")));
            }
            if u.op_norm() > 1.0 + U_CONTRACTION_TOL {
                return Err(Error::Invariant(format!("|U| = {} > 1 at t = {t}", u.op_norm())));
            }
        }
        Ok(())
    }
}

/// Time-domain solution for any spectral kind: the Volterra solver for
/// structured spectra, the closed forms in the wide-band limit.
pub fn solve_greens(config: &ModelConfig, grid: TimeGrid) -> Result<GreensSolution> {
    config.validate()?;
    if config.spectral_kind == SpectralKind::WideBand {
        return wbl_greens(config, grid);
    }
    let u_seq = solve_dyson(config, grid)?;
    let v_seq = compute_fluctuation(&u_seq, config, grid)?;
    Ok(GreensSolution { grid, u_seq, v_seq })
}

/// Moments `(∫₀¹ e^{as} ds, ∫₀¹ s e^{as} ds)` of the unit hat pieces.
pub(crate) fn hat_moments(a: C64) -> (C64, C64) {
    if a.norm() < 1.0 {
        // Σ a^k/(k+1)!  and  Σ a^k/(k!(k+2))
        let mut e0 = C64::new(0.0, 0.0);
        let mut e1 = C64::new(0.0, 0.0);
        let mut pow_over_fact = C64::new(1.0, 0.0); // a^k / k!
        for k in 0..30 {
            let kf = k as f64;
            e0 += pow_over_fact / (kf + 1.0);
            e1 += pow_over_fact / (kf + 2.0);
            pow_over_fact *= a / (kf + 1.0);
        }
        (e0, e1)
    } else {
        let ea = a.exp();
        let e0 = (ea - 1.0) / a;
        let e1 = (ea * (a - 1.0) + 1.0) / (a * a);
        (e0, e1)
    }
}

/// Scale row `l` of `x` by `diag[l]`: `diag(d)·X`.
#[inline]
pub(crate) fn diag_mul(d: [C64; 2], x: &ComplexMat2) -> ComplexMat2 {
    ComplexMat2::new(d[0] * x.a(), d[0] * x.b(), d[1] * x.c(), d[1] * x.d())
}
