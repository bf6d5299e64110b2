//! Quadrature rules: fixed Gauss–Legendre panels for the large frequency
//! grids shared by the time-domain solvers, and a globally adaptive
//! Gauss–Kronrod (7/15) integrator for one-off integrals, including
//! semi-infinite and infinite ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::model::ComplexMat2;

/// Values that can be integrated: a real vector space with a norm.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        C64::norm(*self)
    }
}

impl QuadValue for ComplexMat2 {
    fn zero() -> Self {
        ComplexMat2::zero()
    }
    fn norm(&self) -> f64 {
        self.max_abs()
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A composite Gauss–Legendre rule: flat lists of nodes and weights.
#[derive(Clone, Debug, Default)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    /// Build a composite rule over the sorted `breakpoints`. Each segment is
    /// split into equal panels no wider than `max_width(segment_lo, segment_hi)`,
    /// with `order` Gauss points per panel.
    pub fn build(breakpoints: &[f64], order: usize, max_width: impl Fn(f64, f64) -> f64) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let mut rule = PanelRule::default();
        for seg in breakpoints.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            if hi <= lo {
                continue;
            }
            let h_max = max_width(lo, hi);
            let panels = ((hi - lo) / h_max).ceil().max(1.0) as usize;
            let h = (hi - lo) / panels as f64;
            for p in 0..panels {
                let a = lo + p as f64 * h;
                let mid = a + 0.5 * h;
                for (x, w) in gx.iter().zip(&gw) {
                    rule.nodes.push(mid + 0.5 * h * x);
                    rule.weights.push(0.5 * h * w);
                }
            }
        }
        rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<T: QuadValue>(&self, f: impl Fn(f64) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + f(x) * w)
    }
}

/// Sorted, deduplicated breakpoints restricted to `[lo, hi]`, always including both ends.
pub fn breakpoints_within(lo: f64, hi: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = extra.into_iter().filter(|x| x.is_finite() && *x > lo && *x < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
    pts
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm())
}

/// Controls for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-11, rel_tol: 1e-10, max_intervals: 4000 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Either end may be infinite; infinite ends are mapped onto a finite range
/// with `x = x₀ ± s/(1−s)`. `breakpoints` inside the range are honoured as
/// initial subdivision points.
pub fn adaptive<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: AdaptiveOptions,
) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::zero(), error: 0.0, converged: true };
    }
    if a > b {
        let r = adaptive(f, b, a, breakpoints, opts);
        return QuadResult { value: r.value * -1.0, ..r };
    }
    let finite: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite() && *x > a && *x < b).collect();
    let lo_anchor = if a.is_finite() { a } else { finite.iter().copied().fold(f64::INFINITY, f64::min).min(if b.is_finite() { b } else { 0.0 }) };
    let hi_anchor = if b.is_finite() { b } else { finite.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(if a.is_finite() { a } else { 0.0 }) };

    let mut pieces: Vec<(f64, f64, u8)> = Vec::new();
    // kind 0: finite, 1: (-inf, lo_anchor], 2: [hi_anchor, inf)
    if !a.is_finite() {
        pieces.push((0.0, 1.0, 1));
    }
    let mut inner = breakpoints_within(lo_anchor, hi_anchor, finite.iter().copied());
    if lo_anchor == hi_anchor {
        inner.clear();
    }
    for w in inner.windows(2) {
        pieces.push((w[0], w[1], 0));
    }
    if !b.is_finite() {
        pieces.push((0.0, 1.0, 2));
    }

    let mut total = T::zero();
    let mut err = 0.0;
    let mut converged = true;
    let budget = (opts.max_intervals / pieces.len().max(1)).max(50);
    for (lo, hi, kind) in pieces {
        let r = match kind {
            0 => adaptive_finite(&f, lo, hi, opts, budget),
            1 => adaptive_finite(
                &|s: f64| {
                    let u = 1.0 - s;
                    f(lo_anchor - s / u) * (1.0 / (u * u))
                },
                lo,
                hi,
                opts,
                budget,
            ),
            _ => adaptive_finite(
                &|s: f64| {
                    let u = 1.0 - s;
                    f(hi_anchor + s / u) * (1.0 / (u * u))
                },
                lo,
                hi,
                opts,
                budget,
            ),
        };
        total = total + r.value;
        err += r.error;
        converged &= r.converged;
    }
    QuadResult { value: total, error: err, converged }
}

fn adaptive_finite<T: QuadValue>(
    f: &impl Fn(f64) -> T,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
    max_intervals: usize,
) -> QuadResult<T> {
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    while err > opts.abs_tol.max(opts.rel_tol * total.norm()) {
        if heap.len() >= max_intervals {
            return QuadResult { value: total, error: err, converged: false };
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            return QuadResult { value: total, error: err, converged: false };
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        err = err - worst.error + e1 + e2;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // refresh the error sum to avoid drift from repeated subtraction
    let err = heap.iter().map(|p| p.error).sum();
    QuadResult { value: total, error: err, converged: true }
}
