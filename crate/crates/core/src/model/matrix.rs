//! Dense 2×2 complex matrices.
//!
//! Every object in the two-mode problem (the single-particle Hamiltonian,
//! the propagators, the density blocks) is a 2×2 complex matrix, so a small
//! `Copy` type with closed-form determinant, inverse and exponential is
//! cheaper and clearer than a general dense matrix.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64 as C64;

/// Row-major 2×2 complex matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ComplexMat2 {
    pub m: [[C64; 2]; 2],
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

impl ComplexMat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn diag_real(a: f64, d: f64) -> Self {
        Self::diag(a.into(), d.into())
    }

    pub fn scalar(s: C64) -> Self {
        Self::diag(s, s)
    }

    /// Pauli σ_y.
    pub const fn sigma_y() -> Self {
        Self::new(ZERO, C64::new(0.0, -1.0), I, ZERO)
    }

    /// Raising ladder matrix σ₊ = [[0, 1], [0, 0]].
    pub const fn sigma_plus() -> Self {
        Self::new(ZERO, ONE, ZERO, ZERO)
    }

    /// Lowering ladder matrix σ₋ = [[0, 0], [1, 0]].
    pub const fn sigma_minus() -> Self {
        Self::new(ZERO, ZERO, ONE, ZERO)
    }

    #[inline]
    pub fn a(&self) -> C64 {
        self.m[0][0]
    }
    #[inline]
    pub fn b(&self) -> C64 {
        self.m[0][1]
    }
    #[inline]
    pub fn c(&self) -> C64 {
        self.m[1][0]
    }
    #[inline]
    pub fn d(&self) -> C64 {
        self.m[1][1]
    }

    #[inline]
    pub fn trace(&self) -> C64 {
        self.a() + self.d()
    }

    #[inline]
    pub fn det(&self) -> C64 {
        self.a() * self.d() - self.b() * self.c()
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a(), self.c(), self.b(), self.d())
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.a().conj(), self.c().conj(), self.b().conj(), self.d().conj())
    }

    /// Classical adjugate, `adj(X)·X = det(X)·I`.
    pub fn adjugate(&self) -> Self {
        Self::new(self.d(), -self.b(), -self.c(), self.a())
    }

    /// Inverse, or `None` when the determinant is (numerically) zero
    /// relative to the entry scale.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        let scale = self.max_abs().powi(2);
        if det.norm() <= f64::EPSILON * scale || det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(det.inv()))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.a() * s, self.b() * s, self.c() * s, self.d() * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(s.into())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> [f64; 2] {
        let (lo, hi) = (self.adjoint() * *self).hermitian_eigenvalues();
        [hi.max(0.0).sqrt(), lo.max(0.0).sqrt()]
    }

    /// Spectral (operator) norm.
    pub fn op_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    /// `‖X − X†‖` measured as the largest entry modulus.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.max_abs().max(1.0)
    }

    /// Eigenvalues `(low, high)` of the Hermitian part of the matrix.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let a = self.a().re;
        let d = self.d().re;
        let b = 0.5 * (self.b() + self.c().conj());
        let mean = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        let r = (half * half + b.norm_sqr()).sqrt();
        (mean - r, mean + r)
    }

    /// Eigenvalues of a general 2×2 matrix.
    pub fn eigenvalues(&self) -> (C64, C64) {
        let half_tr = 0.5 * self.trace();
        let disc = (0.25 * (self.a() - self.d()) * (self.a() - self.d()) + self.b() * self.c()).sqrt();
        (half_tr - disc, half_tr + disc)
    }

    /// Matrix exponential via the closed form
    /// `e^X = e^{tr/2} [cosh(s) I + sinh(s)/s (X − tr/2 I)]`, `s² = ((a−d)/2)² + bc`.
    pub fn exp(&self) -> Self {
        let half_tr = 0.5 * self.trace();
        let shifted = *self - Self::scalar(half_tr);
        let s2 = 0.25 * (self.a() - self.d()) * (self.a() - self.d()) + self.b() * self.c();
        let s = s2.sqrt();
        let cosh = s.cosh();
        // sinh(s)/s, with its Taylor series near s = 0
        let sinhc = if s.norm() < 1e-4 {
            ONE + s2 / 6.0 + s2 * s2 / 120.0
        } else {
            s.sinh() / s
        };
        (Self::scalar(cosh) + shifted.scale(sinhc)).scale(half_tr.exp())
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMat2 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.m[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.m[i][j]
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.a() + o.a(), self.b() + o.b(), self.c() + o.c(), self.d() + o.d())
    }
}

impl AddAssign for ComplexMat2 {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.a() - o.a(), self.b() - o.b(), self.c() - o.c(), self.d() - o.d())
    }
}

impl SubAssign for ComplexMat2 {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Neg for ComplexMat2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

impl Mul for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a() * o.a() + self.b() * o.c(),
            self.a() * o.b() + self.b() * o.d(),
            self.c() * o.a() + self.d() * o.c(),
            self.c() * o.b() + self.d() * o.d(),
        )
    }
}

impl MulAssign for ComplexMat2 {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl Mul<C64> for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn mul(self, s: C64) -> Self {
        self.scale(s)
    }
}

impl Mul<f64> for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        self.scale_re(s)
    }
}

impl std::iter::Sum for ComplexMat2 {
    fn sum<It: Iterator<Item = Self>>(iter: It) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}
