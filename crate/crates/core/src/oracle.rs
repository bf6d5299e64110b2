//! Brute-force reference: each reservoir replaced by K discrete modes
//! (star geometry), the one-particle Hamiltonian diagonalized once, and
//! U(t), V(t) read off the exact single-particle propagator.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::greens::{GreensSolution, TimeGrid};
use crate::model::{ComplexMat2, ModelConfig, SpectralKind};
use crate::spectral::{fermi_occupation, SpectralModel};

/// Default dot-weight threshold for localized states.
pub const DEFAULT_DOT_WEIGHT: f64 = 0.5;
/// Margin kept around the eigenvalues of M when choosing windows.
const EIGEN_MARGIN: f64 = 5.0;

#[derive(Clone, Debug)]
pub struct LeadModes {
    pub energies: Vec<f64>,
    /// Real couplings to the lead's dot, `|V_k|² = J(ε_k) Δε/2π`.
    pub couplings: Vec<f64>,
    pub occupations: Vec<f64>,
    pub spacing: f64,
}

#[derive(Clone, Debug)]
pub struct DiscretizedBath {
    pub eps1: f64,
    pub eps2: f64,
    /// |G|; the phase of G is gauged into dot 2 and restored on output.
    pub g_abs: f64,
    pub g_phase: f64,
    pub leads: [LeadModes; 2],
}

/// Energy window for lead `l`: the band for cutoff spectra, otherwise
/// `μ ± max(20d, 20k_T + 10d)` capped so the bath recurrence time
/// `2π/Δε` stays at least `2 t_max`, and widened to cover the spectrum of M.
pub fn default_window(config: &ModelConfig, l: usize, modes_per_lead: usize, t_max: f64) -> (f64, f64) {
    let lead = config.leads()[l];
    if config.spectral_kind == SpectralKind::CutoffLorentzian {
        return lead.band();
    }
    let mut half = (20.0 * lead.bandwidth).max(20.0 * lead.k_t + 10.0 * lead.bandwidth);
    if t_max > 0.0 {
        half = half.min(PI * modes_per_lead as f64 / (2.0 * t_max));
    }
    let (e_lo, e_hi) = config.hamiltonian().hermitian_eigenvalues();
    ((lead.mu - half).min(e_lo - EIGEN_MARGIN), (lead.mu + half).max(e_hi + EIGEN_MARGIN))
}

pub fn discretize(config: &ModelConfig, modes_per_lead: usize, windows: [(f64, f64); 2]) -> Result<DiscretizedBath> {
    config.validate()?;
    if modes_per_lead < 2 {
        return Err(Error::Config("oracle needs at least 2 modes per lead".into()));
    }
    let model = SpectralModel::from(config);
    let mut leads = Vec::with_capacity(2);
    for (l, &(lo, hi)) in windows.iter().enumerate() {
        if !(hi > lo && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Config(format!("invalid oracle window [{lo}, {hi}]")));
        }
        let lead = config.leads()[l];
        if config.spectral_kind == SpectralKind::CutoffLorentzian && lead.gamma > 0.0 {
            let (a, b) = lead.band();
            if hi <= a || lo >= b {
                return Err(Error::Config(format!("oracle window [{lo}, {hi}] excludes the band [{a}, {b}]")));
            }
        }
        let spacing = (hi - lo) / modes_per_lead as f64;
        let energies: Vec<f64> = (0..modes_per_lead).map(|k| lo + (k as f64 + 0.5) * spacing).collect();
        let couplings = energies
            .iter()
            .map(|&e| (model.lead_density(l, e) * spacing / (2.0 * PI)).sqrt())
            .collect();
        let occupations = energies.iter().map(|&e| fermi_occupation(e, lead.mu, lead.k_t)).collect();
        leads.push(LeadModes { energies, couplings, occupations, spacing });
    }
    let right = leads.pop().expect("two leads");
    let left = leads.pop().expect("two leads");
    let g = config.system.g_coupling;
    Ok(DiscretizedBath {
        eps1: config.system.eps1,
        eps2: config.system.eps2,
        g_abs: g.norm(),
        g_phase: g.arg(),
        leads: [left, right],
    })
}

/// Eigen-decomposition of the one-particle Hamiltonian.
#[derive(Clone, Debug)]
pub struct BathSpectrum {
    pub energies: DVector<f64>,
    /// Columns are eigenvectors; rows 0 and 1 are the dots.
    pub vectors: DMatrix<f64>,
}

impl DiscretizedBath {
    pub fn dim(&self) -> usize {
        2 + self.leads[0].energies.len() + self.leads[1].energies.len()
    }

    /// Real symmetric h in the gauge where G ≥ 0. Order: dot 1, dot 2, left modes, right modes.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        h[(0, 0)] = self.eps1;
        h[(1, 1)] = self.eps2;
        h[(0, 1)] = self.g_abs;
        h[(1, 0)] = self.g_abs;
        let mut row = 2;
        for (dot, lead) in self.leads.iter().enumerate() {
            for (&e, &v) in lead.energies.iter().zip(&lead.couplings) {
                h[(row, row)] = e;
                h[(row, dot)] = v;
                h[(dot, row)] = v;
                row += 1;
            }
        }
        h
    }

    pub fn occupations(&self) -> Vec<f64> {
        let mut n = vec![0.0, 0.0];
        n.extend_from_slice(&self.leads[0].occupations);
        n.extend_from_slice(&self.leads[1].occupations);
        n
    }

    pub fn diagonalize(&self) -> BathSpectrum {
        let eig = self.hamiltonian().symmetric_eigen();
        BathSpectrum { energies: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    /// `D = diag(1, e^{−iφ})` with `a = D a'` mapping the real gauge back.
    fn gauge(&self) -> ComplexMat2 {
        ComplexMat2::diag(C64::new(1.0, 0.0), C64::from_polar(1.0, -self.g_phase))
    }

    /// `2π Σ_k |V_k|² δ_w(ω − ε_k)` with a box of width `w`: the spectral
    /// density seen by the discretized lead.
    pub fn reconstructed_density(&self, l: usize, omega: f64, width: f64) -> f64 {
        let lead = &self.leads[l];
        lead.energies
            .iter()
            .zip(&lead.couplings)
            .filter(|(&e, _)| (e - omega).abs() < 0.5 * width)
            .map(|(_, v)| 2.0 * PI * v * v / width)
            .sum()
    }
}

/// Exact U(t) and V(t) of the discretized model on `grid`.
pub fn exact_greens(bath: &DiscretizedBath, grid: TimeGrid) -> GreensSolution {
    let eig = bath.diagonalize();
    exact_greens_with(bath, &eig, grid)
}

pub fn exact_greens_with(bath: &DiscretizedBath, eig: &BathSpectrum, grid: TimeGrid) -> GreensSolution {
    let n = bath.dim();
    let occ = bath.occupations();
    let psi = &eig.vectors;
    // bath rows of the eigenvectors, weighted by √n_b, and dropped where n_b = 0
    let occupied: Vec<usize> = (2..n).filter(|&b| occ[b] > 0.0).collect();
    let mut bath_rows = DMatrix::<f64>::zeros(occupied.len(), n);
    for (r, &b) in occupied.iter().enumerate() {
        let w = occ[b].sqrt();
        for k in 0..n {
            bath_rows[(r, k)] = w * psi[(b, k)];
        }
    }
    let d = bath.gauge();
    let mut u_seq = Vec::with_capacity(grid.len());
    let mut v_seq = Vec::with_capacity(grid.len());
    let mut re = DMatrix::<f64>::zeros(n, 2);
    let mut im = DMatrix::<f64>::zeros(n, 2);
    for t in grid.times() {
        // columns i = dot: ψ_k[i] e^{−iE_k t}
        for k in 0..n {
            let (s, c) = (-eig.energies[k] * t).sin_cos();
            for i in 0..2 {
                re[(k, i)] = psi[(i, k)] * c;
                im[(k, i)] = psi[(i, k)] * s;
            }
        }
        let mut u = ComplexMat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += psi[(i, k)] * C64::new(re[(k, j)], im[(k, j)]);
                }
                u.m[i][j] = acc;
            }
        }
        // x_b[i] = Σ_k ψ_k[b] ψ_k[i] e^{−iE_k t}; V_ij = Σ_b n_b x_b[i] x_b[j]*
        let xr = &bath_rows * &re;
        let xi = &bath_rows * &im;
        let mut v = ComplexMat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..occupied.len() {
                    acc += C64::new(xr[(r, i)], xi[(r, i)]) * C64::new(xr[(r, j)], -xi[(r, j)]);
                }
                v.m[i][j] = acc;
            }
        }
        u_seq.push(d * u * d.adjoint());
        v_seq.push(d * v * d.adjoint());
    }
    // exact initial values, free of rounding in the eigenvector sums
    u_seq[0] = ComplexMat2::identity();
    v_seq[0] = ComplexMat2::zero();
    GreensSolution { grid, u_seq, v_seq }
}

/// Eigenstates of h with more than `weight_threshold` probability on the dots,
/// as `(energy, dot weight)` sorted by energy.
pub fn localized_eigenstates(bath: &DiscretizedBath, weight_threshold: f64) -> Result<Vec<(f64, f64)>> {
    if !(weight_threshold > 0.0 && weight_threshold < 1.0) {
        return Err(Error::Config(format!("dot-weight threshold {weight_threshold} not in (0, 1)")));
    }
    let eig = bath.diagonalize();
    let mut out: Vec<(f64, f64)> = (0..bath.dim())
        .filter_map(|k| {
            let w = eig.vectors[(0, k)].powi(2) + eig.vectors[(1, k)].powi(2);
            (w > weight_threshold).then_some((eig.energies[k], w))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}
