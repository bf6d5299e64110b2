//! Experiment drivers behind the `evolve`, `sweep`, `classify` and `verify` subcommands.

use rayon::prelude::*;

use super::config::{ExperimentConfig, SolverName};
use super::table::Table;
use crate::boundstate::{classify_relaxation, find_bound_states, MIN_EDGE_DISTANCE, MIN_RESIDUE_NORM};
use crate::entanglement::{fermionic_eof, steady_state_eof, NEGATIVE_CLAMP};
use crate::error::{Error, Result};
use crate::greens::{
    bm_fluctuation, bm_steady_state, compute_fluctuation, pole_expansion_lorentzian, solve_dyson, solve_greens,
    steady_state_fluctuation, steady_state_fluctuation_resolvent, wbl_greens, wbl_steady_state, GreensSolution,
    TimeGrid, V_SPECTRUM_TOL,
};
use crate::model::{ComplexMat2, ModelConfig, SpectralKind};
use crate::oracle::{default_window, discretize, exact_greens};
use crate::state::{evolve_density, propagator_coefficients, DensityBlocks};

/// Max-norm deviation from the oracle accepted by `verify`.
pub const ORACLE_TOL: f64 = 1e-2;
/// Fraction of the run averaged for time-domain steady states.
pub const STEADY_WINDOW: f64 = 0.2;

fn header(cfg: &ExperimentConfig, command: &str) -> Vec<String> {
    vec![
        format!("fermidot {} {command}", env!("CARGO_PKG_VERSION")),
        "resolved configuration:".into(),
        cfg.to_toml().trim_end().to_string(),
        format!(
            "tolerances: density 1e-8, V spectrum 1e-8, eof clamp {NEGATIVE_CLAMP:e}, \
             steady window [{:.1} t_max, t_max], oracle {ORACLE_TOL:e}",
            1.0 - STEADY_WINDOW
        ),
    ]
}

fn with_kind(config: &ModelConfig, kind: SpectralKind) -> ModelConfig {
    ModelConfig { spectral_kind: kind, ..*config }
}

/// U(t), V(t) on `grid` with the selected solver.
pub fn greens_for(method: SolverName, config: &ModelConfig, grid: TimeGrid) -> Result<GreensSolution> {
    match method {
        SolverName::Exact => solve_greens(config, grid),
        SolverName::Wbl => wbl_greens(&with_kind(config, SpectralKind::WideBand), grid),
        SolverName::BornMarkov => bm_fluctuation(config, grid),
        SolverName::Pole => {
            if config.spectral_kind != SpectralKind::Lorentzian {
                return Err(Error::Unsupported("the pole solver outside the Lorentzian model"));
            }
            let exp = pole_expansion_lorentzian(config)?;
            let u_seq: Vec<ComplexMat2> = grid
                .times()
                .enumerate()
                .map(|(k, t)| if k == 0 { ComplexMat2::identity() } else { exp.propagator(t) })
                .collect();
            let v_seq = compute_fluctuation(&u_seq, config, grid)?;
            Ok(GreensSolution { grid, u_seq, v_seq })
        }
    }
}

/// V^s and the standard deviation of the time average (0 for closed forms).
pub fn steady_state_for(method: SolverName, config: &ModelConfig, grid: TimeGrid) -> Result<(ComplexMat2, f64)> {
    let v = match method {
        SolverName::Wbl => wbl_steady_state(&with_kind(config, SpectralKind::WideBand))?,
        SolverName::BornMarkov => bm_steady_state(config)?,
        SolverName::Pole => match config.spectral_kind {
            SpectralKind::Lorentzian => match pole_expansion_lorentzian(config) {
                Ok(exp) => steady_state_fluctuation(&exp, config)?,
                Err(Error::Poles(_)) => steady_state_fluctuation_resolvent(config)?,
                Err(e) => return Err(e),
            },
            _ => steady_state_fluctuation_resolvent(config)?,
        },
        SolverName::Exact => return time_averaged_steady_state(config, grid),
    };
    Ok((v, 0.0))
}

fn time_averaged_steady_state(config: &ModelConfig, grid: TimeGrid) -> Result<(ComplexMat2, f64)> {
    let sol = solve_greens(config, grid)?;
    let start = (((1.0 - STEADY_WINDOW) * grid.n_steps as f64).floor() as usize).min(grid.n_steps);
    let tail = &sol.v_seq[start..];
    let n = tail.len() as f64;
    let mean = tail.iter().copied().sum::<ComplexMat2>().scale_re(1.0 / n);
    let var = tail.iter().map(|v| (*v - mean).frobenius().powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

fn check_fluctuation(v: &ComplexMat2, what: &str) -> Result<()> {
    let (lo, hi) = v.hermitian_eigenvalues();
    if !v.is_finite() || v.hermiticity_defect() > V_SPECTRUM_TOL || lo < -V_SPECTRUM_TOL || hi > 1.0 + V_SPECTRUM_TOL {
        return Err(Error::Invariant(format!("{what}: V = {v:?} is not an occupation matrix")));
    }
    Ok(())
}

fn check_eof(e: f64, what: &str) -> Result<()> {
    if !(-NEGATIVE_CLAMP..=1.0 + NEGATIVE_CLAMP).contains(&e) {
        return Err(Error::Invariant(format!("{what}: entanglement {e} outside [0, 1]")));
    }
    Ok(())
}

fn purity(rho: &DensityBlocks) -> f64 {
    (rho.rho1 * rho.rho1).trace().re + (rho.rho2 * rho.rho2).trace().re
}

/// Time series of Ē(t), tr V, occupations, ‖U‖ and purity.
pub fn run_evolution(cfg: &ExperimentConfig) -> Result<Table> {
    let config = cfg.model_config()?;
    let grid = cfg.grid()?;
    let rho0 = cfg.initial_state()?;
    let sol = greens_for(cfg.solver.method, &config, grid)?;
    sol.check_invariants()?;
    let oracle = if cfg.oracle.enabled { Some(oracle_solution(&config, grid, cfg.oracle.modes)?) } else { None };

    let mut cols = vec!["t", "eof", "tr_v", "n1", "n2", "norm_u", "purity"];
    if oracle.is_some() {
        cols.extend(["dev_u", "dev_v"]);
    }
    let mut table = Table::new(&cols);
    for c in header(cfg, "evolve") {
        table.comment(c);
    }
    for k in (0..grid.len()).step_by(cfg.grid.output_every) {
        let t = grid.time(k);
        let (u, v) = (sol.u_seq[k], sol.v_seq[k]);
        let coeffs = propagator_coefficients(&u, &v)?;
        let rho = evolve_density(&rho0, &coeffs);
        rho.validate().map_err(|e| Error::Invariant(format!("t = {t}: {e}")))?;
        let e = fermionic_eof(&rho).value;
        check_eof(e, &format!("t = {t}"))?;
        let c = rho.correlation();
        let mut row = vec![t, e, v.trace().re, c.a().re, c.d().re, u.op_norm(), purity(&rho)];
        if let Some(o) = &oracle {
            row.push((u - o.u_seq[k]).max_abs());
            row.push((v - o.v_seq[k]).max_abs());
        }
        table.push(row);
    }
    Ok(table)
}

/// Oracle U, V on `grid` with default windows.
pub fn oracle_solution(config: &ModelConfig, grid: TimeGrid, modes: usize) -> Result<GreensSolution> {
    let windows = [0, 1].map(|l| default_window(config, l, modes, grid.t_max));
    let bath = discretize(config, modes, windows)?;
    Ok(exact_greens(&bath, grid))
}

/// Ē^s and V^s over one or two sweep axes; grid points run on `workers` threads.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<Table> {
    let axes = &cfg.sweep.axes;
    if axes.is_empty() {
        return Err(Error::Config("sweep.axes: sweep needs at least one axis".into()));
    }
    let values: Vec<Vec<f64>> = axes.iter().map(|a| a.values()).collect();
    let points: Vec<Vec<f64>> = match values.as_slice() {
        [x] => x.iter().map(|&a| vec![a]).collect(),
        [x, y] => x.iter().flat_map(|&a| y.iter().map(move |&b| vec![a, b])).collect(),
        _ => unreachable!("validated: at most two axes"),
    };
    let grid = cfg.grid()?;
    let method = cfg.solver.method;
    let eval = |p: &Vec<f64>| -> Result<Vec<f64>> {
        let mut point = cfg.clone();
        for (axis, &x) in axes.iter().zip(p) {
            point = point.with_parameter(&axis.name, x)?;
        }
        let config = point.model_config()?;
        config.validate()?;
        let at = format!("{:?}", p);
        let (v, std) = steady_state_for(method, &config, grid)?;
        check_fluctuation(&v, &at)?;
        let e = steady_state_eof(&v);
        check_eof(e, &at)?;
        let mut row = p.clone();
        row.extend([e, v.a().re, v.d().re, v.b().re, v.b().im, std]);
        Ok(row)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Solver(format!("worker pool: {e}")))?;
    let rows: Vec<Result<Vec<f64>>> = pool.install(|| points.par_iter().map(eval).collect());

    let mut cols: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
    cols.extend(["eof_s", "v11", "v22", "re_v12", "im_v12", "v_std"]);
    let mut table = Table::new(&cols);
    for c in header(cfg, "sweep") {
        table.comment(c);
    }
    for row in rows {
        table.push(row?);
    }
    Ok(table)
}

/// Out-of-band roots, the relaxation class, and optionally the ‖U‖ plateau
/// of a time-domain run over `[0.8 t_max, t_max]`.
pub fn run_classify(cfg: &ExperimentConfig, plateau: bool) -> Result<Table> {
    let config = cfg.model_config()?;
    if config.spectral_kind != SpectralKind::CutoffLorentzian {
        return Err(Error::Config("model.spectral: classify needs cutoff_lorentzian".into()));
    }
    let roots = find_bound_states(&config);
    let class = classify_relaxation(&roots);
    let mut table = Table::new(&["energy", "edge_distance", "dot_weight", "residue_max"]);
    for c in header(cfg, "classify") {
        table.comment(c);
    }
    table.comment(format!(
        "effective roots: {} (edge distance >= {MIN_EDGE_DISTANCE:e}, residue >= {MIN_RESIDUE_NORM:e})",
        class.effective_roots
    ));
    table.comment(format!("relaxation: {}", class.kind));
    if plateau {
        let grid = cfg.grid()?;
        let u = solve_dyson(&config, grid)?;
        let start = ((1.0 - STEADY_WINDOW) * grid.n_steps as f64).floor() as usize;
        let norms: Vec<f64> = u[start..].iter().map(ComplexMat2::op_norm).collect();
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        let (lo, hi) = norms.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        table.comment(format!("norm_u plateau: mean {mean:.6e}, min {lo:.6e}, max {hi:.6e}"));
    }
    for r in &roots {
        table.push(vec![r.energy, r.edge_distance, r.dot_weight(), r.residue_weight.max_abs()]);
    }
    Ok(table)
}

/// Oracle cross-check of U and V; sets `verdict` when either deviates by more than [`ORACLE_TOL`].
pub fn run_verify(cfg: &ExperimentConfig, modes: usize) -> Result<Table> {
    let config = cfg.model_config()?;
    let grid = cfg.grid()?;
    let sol = greens_for(cfg.solver.method, &config, grid)?;
    let oracle = oracle_solution(&config, grid, modes)?;
    let mut table = Table::new(&["t", "dev_u", "dev_v"]);
    for c in header(cfg, "verify") {
        table.comment(c);
    }
    let (mut worst_u, mut worst_v) = (0.0f64, 0.0f64);
    for k in 0..grid.len() {
        let du = (sol.u_seq[k] - oracle.u_seq[k]).max_abs();
        let dv = (sol.v_seq[k] - oracle.v_seq[k]).max_abs();
        worst_u = worst_u.max(du);
        worst_v = worst_v.max(dv);
        if k % cfg.grid.output_every == 0 {
            table.push(vec![grid.time(k), du, dv]);
        }
    }
    table.comment(format!("oracle modes per lead: {modes}"));
    table.comment(format!("max dev_u {worst_u:.3e}, max dev_v {worst_v:.3e}, tolerance {ORACLE_TOL:e}"));
    if worst_u > ORACLE_TOL || worst_v > ORACLE_TOL {
        table.verdict = Some(format!("oracle mismatch: max |dU| = {worst_u:.3e}, max |dV| = {worst_v:.3e}"));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resonant(d: f64) -> ExperimentConfig {
        let text = format!(
            "[system]\neps1 = 2.0\neps2 = 2.0\ng = 0.5\n\
             [left]\nd = {d}\nmu = 2.0\nk_t = 0.5\n\
             [right]\nd = {d}\nmu = 2.0\nk_t = 0.5\n\
             [model]\nspectral = \"lorentzian\"\n\
             [grid]\nt_max = 4.0\ndt = 0.01\noutput_every = 50\n"
        );
        ExperimentConfig::from_toml_str(&text).unwrap()
    }

    #[test]
    fn evolution_rows_are_physical() {
        let t = run_evolution(&resonant(2.0)).unwrap();
        assert_eq!(t.rows.len(), 9);
        let eof = t.column("eof").unwrap();
        assert_eq!(eof[0], 0.0);
        assert!(eof.iter().all(|e| (0.0..=1.0).contains(e)));
        let purity = t.column("purity").unwrap();
        assert!((purity[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rabi_oscillation_without_reservoirs() {
        let mut cfg = resonant(1.0);
        cfg.left.gamma = 0.0;
        cfg.right.gamma = 0.0;
        cfg.grid.output_every = 1;
        let t = run_evolution(&cfg).unwrap();
        // |1₁⟩ → cos(Gt)|1₁⟩ − i sin(Gt)|1₂⟩: Ē = h(sin²(Gt)) style entanglement with period π/G
        let eof = t.column("eof").unwrap();
        let times = t.column("t").unwrap();
        let period = std::f64::consts::PI / 0.5;
        for (k, &tk) in times.iter().enumerate() {
            if tk + period <= 4.0 {
                continue;
            }
            let back = times.iter().position(|&s| (s - (tk - period)).abs() < 1e-9);
            if let Some(j) = back {
                assert!((eof[k] - eof[j]).abs() < 1e-6);
            }
        }
        assert!(eof.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn sweep_is_ordered_and_worker_independent() {
        let mut cfg = resonant(2.0);
        cfg.solver.method = SolverName::Pole;
        cfg.sweep.axes = vec![
            super::super::config::SweepAxis { name: "eps".into(), min: 0.0, max: 4.0, steps: 3 },
            super::super::config::SweepAxis { name: "mu".into(), min: 0.0, max: 4.0, steps: 2 },
        ];
        let a = run_sweep(&cfg, 1).unwrap();
        let b = run_sweep(&cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 6);
        assert_eq!(&a.rows[1][..2], &[0.0, 4.0]);
        assert_eq!(&a.rows[2][..2], &[2.0, 0.0]);
    }

    #[test]
    fn born_markov_diagonal_is_unentangled() {
        let mut cfg = resonant(2.0);
        cfg.solver.method = SolverName::BornMarkov;
        cfg.sweep.axes = vec![super::super::config::SweepAxis { name: "eps".into(), min: 0.0, max: 10.0, steps: 5 }];
        let t = run_sweep(&cfg, 2).unwrap();
        assert!(t.column("eof_s").unwrap().iter().all(|e| e.abs() < 1e-10));
    }

    #[test]
    fn classify_requires_cutoff() {
        assert!(matches!(run_classify(&resonant(1.0), false), Err(Error::Config(_))));
    }
}
