//! Wide-band limit (flat spectrum, exact) and the Born–Markov approximation.
//!
//! With `A = iM + Γ/2` the wide-band propagator is `U(t) = e^{−At}` and
//! `ũ_l(ω, t) = (I − U(t) e^{iωt}) (A − iω)^{-1} e_l`, so
//! `V(t) = Σ_l Γ_l ∫ dω/2π n_l ũ_l ũ_l†` needs no time stepping.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;

use super::{steady_state_fluctuation_resolvent, GreensSolution, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{ComplexMat2, ModelConfig, SpectralKind};
use crate::quad::{breakpoints_within, PanelRule};
use crate::spectral::{fermi_occupation, PANEL_ORDER};

/// Distance below the spectrum where the explicit frequency window stops and
/// the asymptotic tail takes over.
const TAIL_START: f64 = 200.0;

fn decay_matrix(config: &ModelConfig) -> ComplexMat2 {
    config.hamiltonian().scale(C64::new(0.0, 1.0)) + config.gamma_matrix().scale_re(0.5)
}

/// `U_WBL(t) = exp(−(iM + Γ/2) t)`.
fn wbl_propagator(config: &ModelConfig, t: f64) -> ComplexMat2 {
    decay_matrix(config).scale_re(-t).exp()
}

/// Exponential integral E₁(z) for Re z ≥ 0.
fn exp_integral_e1(z: C64) -> C64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if z.norm() <= 1.0 {
        let mut sum = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for k in 1..60 {
            term *= -z / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.norm() < 1e-17 {
                break;
            }
        }
        -EULER_GAMMA - z.ln() - sum
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = C64::new(1.0 / tiny, 0.0);
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..2000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// `∫_R^∞ e^{−iνt}/ν² dν` for R > 0, t ≥ 0.
fn tail_integral(r: f64, t: f64) -> C64 {
    if t == 0.0 {
        return C64::new(1.0 / r, 0.0);
    }
    let x = r * t;
    C64::from_polar(1.0 / r, -x) - C64::new(0.0, t) * exp_integral_e1(C64::new(0.0, x))
}

/// Exact wide-band U(t) and V(t) on `grid`.
pub fn wbl_greens(config: &ModelConfig, grid: TimeGrid) -> Result<GreensSolution> {
    config.validate()?;
    if config.spectral_kind != SpectralKind::WideBand {
        return Err(Error::Config("wbl_greens requires the wide_band spectral kind".into()));
    }
    let n = grid.n_steps;
    let a = decay_matrix(config);
    let u_seq: Vec<ComplexMat2> = grid.times().map(|t| wbl_propagator(config, t)).collect();
    let (e_lo, e_hi) = config.hamiltonian().hermitian_eigenvalues();
    let centre = 0.5 * (e_lo + e_hi);

    let mut v11 = vec![0.0; n + 1];
    let mut v22 = vec![0.0; n + 1];
    let mut v12 = vec![C64::new(0.0, 0.0); n + 1];
    let dt = grid.dt();
    for (l, lead) in config.leads().into_iter().enumerate() {
        if lead.gamma == 0.0 {
            continue;
        }
        let lo = lead.mu.min(e_lo) - TAIL_START;
        let hi = lead.mu + 40.0 * lead.k_t;
        let base = (PI / (2.0 * grid.t_max)).min(0.25);
        let fine = (lead.k_t / 2.0).max(1e-3);
        let edge = 20.0 * lead.k_t;
        let bps = breakpoints_within(lo, hi, [lead.mu, lead.mu - edge, e_lo, e_hi]);
        let rule = PanelRule::build(&bps, PANEL_ORDER, |x, y| {
            if lead.k_t > 0.0 && (0.5 * (x + y) - lead.mu).abs() < edge {
                base.min(fine)
            } else {
                base
            }
        });
        for (&w, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let amp = wt * lead.gamma * fermi_occupation(w, lead.mu, lead.k_t) / (2.0 * PI);
            if amp == 0.0 {
                continue;
            }
            let shifted = a - ComplexMat2::scalar(C64::new(0.0, w));
            let inv = shifted
                .inverse()
                .ok_or_else(|| Error::Solver(format!("singular wide-band resolvent at ω = {w}")))?;
            let y = [inv[(0, l)], inv[(1, l)]];
            let step = C64::from_polar(1.0, w * dt);
            let mut phase = C64::new(1.0, 0.0);
            for k in 1..=n {
                if k % 128 == 0 {
                    phase = C64::from_polar(1.0, w * dt * k as f64);
                } else {
                    phase *= step;
                }
                let u = &u_seq[k];
                let x0 = y[0] - phase * (u.a() * y[0] + u.b() * y[1]);
                let x1 = y[1] - phase * (u.c() * y[0] + u.d() * y[1]);
                v11[k] += amp * x0.norm_sqr();
                v22[k] += amp * x1.norm_sqr();
                v12[k] += amp * x0 * x1.conj();
            }
        }
        // ω < lo: ũ ≈ (i/ν)(I − U e^{iωt}) e_l with ν = ω − centre.
        let r = centre - lo;
        let el = if l == 0 { ComplexMat2::diag_real(1.0, 0.0) } else { ComplexMat2::diag_real(0.0, 1.0) };
        let pref = lead.gamma / (2.0 * PI);
        for k in 1..=n {
            let t = grid.time(k);
            let u = u_seq[k];
            let osc = tail_integral(r, t) * C64::from_polar(1.0, centre * t);
            let ue = u * el;
            let tail = (el + ue * ue.adjoint()).scale_re(1.0 / r) - ue.scale(osc) - ue.adjoint().scale(osc.conj());
            let tail = tail.scale_re(pref);
            v11[k] += tail.a().re;
            v22[k] += tail.d().re;
            v12[k] += tail.b();
        }
    }
    let v_seq = (0..=n)
        .map(|k| ComplexMat2::new(v11[k].into(), v12[k], v12[k].conj(), v22[k].into()))
        .collect();
    Ok(GreensSolution { grid, u_seq, v_seq })
}

/// Wide-band steady state `∫ dω/2π G nΓ G†` with `G = (ω − M + iΓ/2)^{-1}`.
pub fn wbl_steady_state(config: &ModelConfig) -> Result<ComplexMat2> {
    if config.spectral_kind != SpectralKind::WideBand {
        return Err(Error::Config("wbl_steady_state requires the wide_band spectral kind".into()));
    }
    steady_state_fluctuation_resolvent(config)
}

/// Born–Markov steady state: the solution of `AV + VA† = diag(Γ_L n_L(ε₁), Γ_R n_R(ε₂))`.
pub fn bm_steady_state(config: &ModelConfig) -> Result<ComplexMat2> {
    config.validate()?;
    let a = decay_matrix(config);
    let s = &config.system;
    let q = ComplexMat2::diag_real(
        config.left.gamma * fermi_occupation(s.eps1, config.left.mu, config.left.k_t),
        config.right.gamma * fermi_occupation(s.eps2, config.right.mu, config.right.k_t),
    );
    // vec index (i, j) -> 2i + j
    let mut lyap = Matrix4::<C64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                lyap[(2 * i + j, 2 * k + j)] += a[(i, k)];
                lyap[(2 * i + j, 2 * i + k)] += a[(j, k)].conj();
            }
        }
    }
    let rhs = Vector4::new(q.a(), q.b(), q.c(), q.d());
    let sol = lyap
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("Born-Markov Lyapunov equation is singular (no damping)".into()))?;
    let v = ComplexMat2::new(sol[0], sol[1], sol[2], sol[3]);
    Ok((v + v.adjoint()).scale_re(0.5))
}

/// Born–Markov `V(t) = V∞ − U(t) V∞ U†(t)` with the wide-band propagator.
pub fn bm_fluctuation(config: &ModelConfig, grid: TimeGrid) -> Result<GreensSolution> {
    let v_inf = bm_steady_state(config)?;
    let u_seq: Vec<ComplexMat2> = grid.times().map(|t| wbl_propagator(config, t)).collect();
    let v_seq = u_seq
        .iter()
        .enumerate()
        .map(|(k, u)| if k == 0 { ComplexMat2::zero() } else { v_inf - *u * v_inf * u.adjoint() })
        .collect();
    Ok(GreensSolution { grid, u_seq, v_seq })
}
