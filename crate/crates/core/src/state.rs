//! Reduced density matrix of the two dots.
//!
//! Even parity splits the 4×4 density matrix into two blocks:
//! `rho1` over (|vac⟩, |1₁1₂⟩) with |1₁1₂⟩ = a₁†a₂†|vac⟩, and `rho2` over
//! (|1₁⟩, |1₂⟩), with `(rho2)_ij = ⟨1_i|ρ|1_j⟩`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::ComplexMat2;

/// Tolerance for trace, Hermiticity and positivity of density blocks.
pub const DENSITY_TOL: f64 = 1e-8;

/// Coefficients of the propagating function at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorCoefficients {
    pub j1: ComplexMat2,
    pub j2: ComplexMat2,
    pub j3: ComplexMat2,
    pub a: C64,
}

impl PropagatorCoefficients {
    pub fn identity() -> Self {
        Self { j1: ComplexMat2::identity(), j2: ComplexMat2::zero(), j3: ComplexMat2::zero(), a: C64::new(1.0, 0.0) }
    }
}

/// `W = (I − V)^{-1}`, `J₁ = WU`, `J₂ = W − I`, `J₃ = U†WU − I`, `A = 1/det W`.
pub fn propagator_coefficients(u: &ComplexMat2, v: &ComplexMat2) -> Result<PropagatorCoefficients> {
    let i_minus_v = ComplexMat2::identity() - *v;
    let w = i_minus_v
        .inverse()
        .ok_or_else(|| Error::SingularFluctuation(i_minus_v.det().norm()))?;
    let id = ComplexMat2::identity();
    Ok(PropagatorCoefficients {
        j1: w * *u,
        j2: w - id,
        j3: u.adjoint() * w * *u - id,
        a: 1.0 / w.det(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityBlocks {
    pub rho1: ComplexMat2,
    pub rho2: ComplexMat2,
}

impl DensityBlocks {
    pub fn new(rho1: ComplexMat2, rho2: ComplexMat2) -> Result<Self> {
        let out = Self { rho1, rho2 };
        out.validate()?;
        Ok(out)
    }

    pub fn vacuum() -> Self {
        Self { rho1: ComplexMat2::diag_real(1.0, 0.0), rho2: ComplexMat2::zero() }
    }

    pub fn double_occupancy() -> Self {
        Self { rho1: ComplexMat2::diag_real(0.0, 1.0), rho2: ComplexMat2::zero() }
    }

    /// One electron in the orbital `c₁|1₁⟩ + c₂|1₂⟩` (normalised here).
    pub fn single(c1: C64, c2: C64) -> Result<Self> {
        let norm = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Config("single-electron orbital must be non-zero".into()));
        }
        let (c1, c2) = (c1 / norm, c2 / norm);
        let rho2 = ComplexMat2::new(c1 * c1.conj(), c1 * c2.conj(), c2 * c1.conj(), c2 * c2.conj());
        Ok(Self { rho1: ComplexMat2::zero(), rho2 })
    }

    /// `(|1₁⟩ + |1₂⟩)/√2`.
    pub fn bell() -> Self {
        Self::single(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).expect("non-zero orbital")
    }

    /// Gaussian (quasi-free) state with correlation matrix `C_ij = ⟨a_j† a_i⟩`.
    pub fn from_correlation(c: &ComplexMat2) -> Self {
        let det = c.det();
        Self {
            rho1: ComplexMat2::diag(1.0 - c.trace() + det, det),
            rho2: *c - ComplexMat2::scalar(det),
        }
    }

    /// `C_ij = ⟨a_j† a_i⟩`.
    pub fn correlation(&self) -> ComplexMat2 {
        self.rho2 + ComplexMat2::scalar(self.rho1.d())
    }

    /// Mean occupation `⟨n₁⟩ + ⟨n₂⟩`.
    pub fn total_occupation(&self) -> f64 {
        self.rho2.trace().re + 2.0 * self.rho1.d().re
    }

    pub fn total_trace(&self) -> C64 {
        self.rho1.trace() + self.rho2.trace()
    }

    /// Eigenvalues of (rho1, rho2), each ascending; values in (−1e-8, 0) are reported as 0.
    pub fn eigenvalues(&self) -> [(f64, f64); 2] {
        let clip = |x: f64| if x < 0.0 && x > -DENSITY_TOL { 0.0 } else { x };
        [self.rho1, self.rho2].map(|m| {
            let (lo, hi) = m.hermitian_eigenvalues();
            (clip(lo), clip(hi))
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rho1.is_finite() || !self.rho2.is_finite() {
            return Err(Error::Invariant("non-finite density block".into()));
        }
        let tr = self.total_trace();
        if (tr - 1.0).norm() > DENSITY_TOL {
            return Err(Error::Invariant(format!("trace {tr} != 1")));
        }
        for (name, m) in [("rho1", &self.rho1), ("rho2", &self.rho2)] {
            if m.hermiticity_defect() > DENSITY_TOL {
                return Err(Error::Invariant(format!("{name} is not Hermitian")));
            }
            let (lo, _) = m.hermitian_eigenvalues();
            if lo < -DENSITY_TOL {
                return Err(Error::Invariant(format!("{name} has negative eigenvalue {lo:e}")));
            }
        }
        Ok(())
    }
}

/// `σ_y Xᵀ σ_y`.
fn sy_t(x: &ComplexMat2) -> ComplexMat2 {
    let sy = ComplexMat2::sigma_y();
    sy * x.transpose() * sy
}

/// `diag(1, det J)`.
fn tilde(j: &ComplexMat2) -> ComplexMat2 {
    ComplexMat2::diag(C64::new(1.0, 0.0), j.det())
}

/// Evolve initial blocks with the propagating-function coefficients,
/// evaluated term by term as in the Grassmann-integral result.
pub fn evolve_density(rho0: &DensityBlocks, coeffs: &PropagatorCoefficients) -> DensityBlocks {
    let PropagatorCoefficients { j1, j2, j3, a } = *coeffs;
    let (rho1, rho2) = (rho0.rho1, rho0.rho2);
    let r11 = rho1.a();
    let r22 = rho1.d();
    let sp_sm = ComplexMat2::sigma_plus() * ComplexMat2::sigma_minus();
    let sm_sp = ComplexMat2::sigma_minus() * ComplexMat2::sigma_plus();
    let tr_r2j3 = (rho2 * j3).trace();
    let det_j3 = j3.det();
    let j1_dag = j1.adjoint();
    let tj1 = tilde(&j1);

    let rho1_f = (tj1 * (rho1 + sp_sm.scale(r22 * det_j3 - tr_r2j3)) * tj1.adjoint()).scale(a)
        + sm_sp.scale(
            a * ((sy_t(&j2) * j1 * rho2 * j1_dag).trace()
                - r22 * (sy_t(&j2) * j1 * sy_t(&j3) * j1_dag).trace()
                + (r11 - tr_r2j3 + r22 * det_j3) * j2.det()),
        );
    let rho2_f = (j1 * (rho2 - sy_t(&j3).scale(r22)) * j1_dag).scale(a) + j2.scale(a * (r11 + r22 * det_j3 - tr_r2j3));
    DensityBlocks { rho1: rho1_f, rho2: rho2_f }
}

/// Thermalized blocks: `ρ₁ = diag(1 + det V − tr V, det V)`, `ρ₂ = V − det V·I`.
pub fn steady_state_density(v_s: &ComplexMat2) -> DensityBlocks {
    let det = v_s.det().re;
    let tr = v_s.trace().re;
    DensityBlocks {
        rho1: ComplexMat2::diag_real(1.0 + det - tr, det),
        rho2: ComplexMat2::new((v_s.a().re - det).into(), v_s.b(), v_s.b().conj(), (v_s.d().re - det).into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_unitary(rng: &mut impl Rng) -> ComplexMat2 {
        let (a, b, c1, phi) = (
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
        );
        let (cs, sn) = (phi.cos(), phi.sin());
        ComplexMat2::new(
            C64::from_polar(cs, a),
            C64::from_polar(sn, b),
            -C64::from_polar(sn, c1 - b + a),
            C64::from_polar(cs, c1),
        )
    }

    fn random_hermitian(rng: &mut impl Rng, lo: f64, hi: f64) -> ComplexMat2 {
        let q = random_unitary(rng);
        let d = ComplexMat2::diag_real(rng.random_range(lo..hi), rng.random_range(lo..hi));
        q * d * q.adjoint()
    }

    fn random_contraction(rng: &mut impl Rng) -> ComplexMat2 {
        random_unitary(rng) * ComplexMat2::diag_real(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)) * random_unitary(rng)
    }

    fn close(a: &DensityBlocks, b: &DensityBlocks, tol: f64) -> bool {
        (a.rho1 - b.rho1).max_abs() < tol && (a.rho2 - b.rho2).max_abs() < tol
    }

    #[test]
    fn coefficient_examples() {
        let id = propagator_coefficients(&ComplexMat2::identity(), &ComplexMat2::zero()).unwrap();
        assert_eq!(id, PropagatorCoefficients::identity());
        let half = propagator_coefficients(&ComplexMat2::zero(), &ComplexMat2::diag_real(0.5, 0.5)).unwrap();
        assert!((half.j2 - ComplexMat2::identity()).max_abs() < 1e-15);
        assert!((half.j3 + ComplexMat2::identity()).max_abs() < 1e-15);
        assert!(half.j1.max_abs() == 0.0 && (half.a - 0.25).norm() < 1e-15);
        assert!(matches!(
            propagator_coefficients(&ComplexMat2::identity(), &ComplexMat2::identity()),
            Err(Error::SingularFluctuation(_))
        ));
    }

    #[test]
    fn coefficients_satisfy_defining_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let u = random_contraction(&mut rng);
            let v = random_hermitian(&mut rng, 0.0, 0.95);
            let k = propagator_coefficients(&u, &v).unwrap();
            let w = (ComplexMat2::identity() - v).inverse().unwrap();
            assert!(((ComplexMat2::identity() - v) * (k.j2 + ComplexMat2::identity()) - ComplexMat2::identity()).max_abs() < 1e-10);
            assert!((k.j1 - w * u).max_abs() < 1e-10);
            assert!((k.j3 - (u.adjoint() * w * u - ComplexMat2::identity())).max_abs() < 1e-10);
            assert!((k.a * w.det() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn identity_propagator_is_a_fixed_point() {
        let rho = DensityBlocks::new(
            ComplexMat2::new(c(0.3, 0.0), c(0.1, 0.05), c(0.1, -0.05), c(0.2, 0.0)),
            ComplexMat2::new(c(0.25, 0.0), c(0.0, 0.1), c(0.0, -0.1), c(0.25, 0.0)),
        )
        .unwrap();
        let out = evolve_density(&rho, &PropagatorCoefficients::identity());
        assert!(close(&out, &rho, 1e-15));
    }

    #[test]
    fn unitary_limit_rotates_single_particle_block() {
        let m = ComplexMat2::from_real(2.0, 0.5, 0.5, 1.0);
        let u = m.scale(c(0.0, -1.7)).exp();
        let k = propagator_coefficients(&u, &ComplexMat2::zero()).unwrap();
        let rho = DensityBlocks::single(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let out = evolve_density(&rho, &k);
        assert!((out.rho2 - u * rho.rho2 * u.adjoint()).max_abs() < 1e-12);
        assert!((out.rho1 - rho.rho1).max_abs() < 1e-12);
        let (lo, hi) = out.rho2.hermitian_eigenvalues();
        assert!(lo.abs() < 1e-10 && (hi - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matches_gaussian_correlation_propagation() {
        // Gaussian oracle: C(t) = U C₀ U† + V for quasi-free initial states.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let initial = [
            DensityBlocks::vacuum(),
            DensityBlocks::double_occupancy(),
            DensityBlocks::single(c(1.0, 0.0), c(0.0, 0.0)).unwrap(),
            DensityBlocks::single(c(0.0, 0.0), c(1.0, 0.0)).unwrap(),
            DensityBlocks::bell(),
            DensityBlocks::single(c(0.3, -0.2), c(0.1, 0.9)).unwrap(),
        ];
        for _ in 0..200 {
            let u = random_contraction(&mut rng);
            let v = random_hermitian(&mut rng, 0.0, 0.9);
            let k = propagator_coefficients(&u, &v).unwrap();
            for rho0 in &initial {
                let c0 = rho0.correlation();
                let expect = DensityBlocks::from_correlation(&(u * c0 * u.adjoint() + v));
                let got = evolve_density(rho0, &k);
                assert!(close(&got, &expect, 1e-10), "{got:?} vs {expect:?}");
            }
        }
    }

    #[test]
    fn preserves_trace_for_mixed_initial_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let w: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let s: f64 = w.iter().sum();
            let r1 = random_hermitian(&mut rng, 0.0, 1.0);
            let r2 = random_hermitian(&mut rng, 0.0, 1.0);
            let rho0 = DensityBlocks {
                rho1: r1.scale_re(w[0] / (s * r1.trace().re)),
                rho2: r2.scale_re((w[1] + w[2]) / (s * r2.trace().re)),
            };
            rho0.validate().unwrap();
            let k = propagator_coefficients(&random_contraction(&mut rng), &random_hermitian(&mut rng, 0.0, 0.9)).unwrap();
            let out = evolve_density(&rho0, &k);
            assert!((out.total_trace() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn steady_state_examples() {
        assert!(close(&steady_state_density(&ComplexMat2::zero()), &DensityBlocks::vacuum(), 1e-15));
        assert!(close(&steady_state_density(&ComplexMat2::identity()), &DensityBlocks::double_occupancy(), 1e-15));
        let bell = steady_state_density(&ComplexMat2::from_real(0.5, 0.5, 0.5, 0.5));
        assert!(bell.rho1.max_abs() == 0.0);
        assert!((bell.rho2 - ComplexMat2::from_real(0.5, 0.5, 0.5, 0.5)).max_abs() == 0.0);
    }

    #[test]
    fn steady_state_is_the_gaussian_state_of_v() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let v = random_hermitian(&mut rng, 0.0, 1.0);
            let s = steady_state_density(&v);
            s.validate().unwrap();
            assert!(close(&s, &DensityBlocks::from_correlation(&v), 1e-14));
        }
    }

    #[test]
    fn validation_flags_bad_blocks() {
        let bad_trace = DensityBlocks { rho1: ComplexMat2::diag_real(0.5, 0.0), rho2: ComplexMat2::zero() };
        assert!(bad_trace.validate().is_err());
        let negative = DensityBlocks { rho1: ComplexMat2::diag_real(1.1, -0.1), rho2: ComplexMat2::zero() };
        assert!(negative.validate().is_err());
        let tiny = DensityBlocks { rho1: ComplexMat2::diag_real(1.0 + 1e-10, -1e-10), rho2: ComplexMat2::zero() };
        assert!(tiny.validate().is_ok());
        assert_eq!(tiny.eigenvalues()[0].0, 0.0);
    }
}
