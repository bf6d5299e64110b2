//! Experiment description read from a TOML file.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{TimeGrid, DEFAULT_DT};
use crate::model::{ComplexMat2, ModelConfig, ReservoirParams, SpectralKind, SystemParams};
use crate::state::DensityBlocks;

/// Names accepted on sweep axes. `eps` and `mu` move both dots / both leads.
pub const SWEEP_PARAMETERS: [&str; 11] =
    ["eps1", "eps2", "mu1", "mu2", "g", "d", "k_t", "gamma", "omega_cut", "eps", "mu"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub eps1: f64,
    pub eps2: f64,
    pub g: f64,
    #[serde(default)]
    pub g_phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadSection {
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub d: f64,
    pub mu: f64,
    pub k_t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_cut: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralName {
    Lorentzian,
    CutoffLorentzian,
    WideBand,
}

impl From<SpectralName> for SpectralKind {
    fn from(s: SpectralName) -> Self {
        match s {
            SpectralName::Lorentzian => SpectralKind::Lorentzian,
            SpectralName::CutoffLorentzian => SpectralKind::CutoffLorentzian,
            SpectralName::WideBand => SpectralKind::WideBand,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub spectral: SpectralName,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Emit every n-th sample.
    #[serde(default = "one_usize")]
    pub output_every: usize,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn one_usize() -> usize {
    1
}

impl Default for GridSection {
    fn default() -> Self {
        Self { t_max: 30.0, dt: DEFAULT_DT, output_every: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialName {
    Vacuum,
    Single1,
    Single2,
    BellPlus,
    BellMinus,
    Explicit,
}

/// Explicit blocks are given as `[[re, im], [re, im]]` rows.
pub type RawBlock = [[[f64; 2]; 2]; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub state: InitialName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho1: Option<RawBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho2: Option<RawBlock>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self { state: InitialName::Single1, rho1: None, rho2: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.min + i as f64 * h).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    #[default]
    Exact,
    Wbl,
    BornMarkov,
    Pole,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub method: SolverName,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_modes")]
    pub modes: usize,
}

fn default_modes() -> usize {
    400
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { enabled: false, modes: default_modes() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub left: LeadSection,
    pub right: LeadSection,
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

/// 1-based line of `key` inside `[section]`, for error messages.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let header = format!("[{section}]");
    let mut inside = false;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            inside = trimmed == header;
            continue;
        }
        if inside && trimmed.split('=').next().map(str::trim) == Some(key) {
            return Some(i + 1);
        }
    }
    None
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate().map_err(|e| match e {
            Error::Config(msg) => {
                let at = msg
                    .split_once(": ")
                    .and_then(|(path, _)| path.split_once('.'))
                    .and_then(|(s, k)| locate(text, s, k));
                match at {
                    Some(line) => Error::Config(format!("line {line}: {msg}")),
                    None => Error::Config(msg),
                }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Checks that need the whole file; messages start with `section.key: `.
    pub fn validate(&self) -> Result<()> {
        self.model_config()?.validate()?;
        let g = &self.grid;
        if !(g.t_max > 0.0 && g.t_max.is_finite()) {
            return Err(Error::Config("grid.t_max: must be finite and > 0".into()));
        }
        if !(g.dt > 0.0 && g.dt <= g.t_max) {
            return Err(Error::Config("grid.dt: must be in (0, t_max]".into()));
        }
        if g.output_every == 0 {
            return Err(Error::Config("grid.output_every: must be >= 1".into()));
        }
        if self.sweep.axes.len() > 2 {
            return Err(Error::Config("sweep.axes: at most two axes".into()));
        }
        for axis in &self.sweep.axes {
            if !SWEEP_PARAMETERS.contains(&axis.name.as_str()) {
                return Err(Error::Config(format!(
                    "sweep.axes: unknown parameter `{}` (expected one of {})",
                    axis.name,
                    SWEEP_PARAMETERS.join(", ")
                )));
            }
            if axis.steps == 0 || !axis.min.is_finite() || !axis.max.is_finite() {
                return Err(Error::Config(format!("sweep.axes: axis `{}` needs finite bounds and steps >= 1", axis.name)));
            }
        }
        if self.oracle.modes < 2 {
            return Err(Error::Config("oracle.modes: must be >= 2".into()));
        }
        self.initial_state()?;
        Ok(())
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        let kind = SpectralKind::from(self.model.spectral);
        let lead = |s: &LeadSection, name: &str| -> Result<ReservoirParams> {
            let p = ReservoirParams::lorentzian(s.gamma, s.d, s.mu, s.k_t);
            match (kind, s.omega_cut) {
                (SpectralKind::CutoffLorentzian, Some(w)) => Ok(p.with_cutoff(w)),
                (SpectralKind::CutoffLorentzian, None) => {
                    Err(Error::Config(format!("{name}.omega_cut: required for cutoff_lorentzian")))
                }
                (_, Some(_)) => Err(Error::Config(format!("{name}.omega_cut: only valid for cutoff_lorentzian"))),
                (_, None) => Ok(p),
            }
        };
        let s = &self.system;
        Ok(ModelConfig {
            system: SystemParams { eps1: s.eps1, eps2: s.eps2, g_coupling: C64::from_polar(s.g, s.g_phase) },
            left: lead(&self.left, "left")?,
            right: lead(&self.right, "right")?,
            spectral_kind: kind,
        })
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::with_step(self.grid.t_max, self.grid.dt)
    }

    pub fn initial_state(&self) -> Result<DensityBlocks> {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let init = &self.initial;
        let state = match init.state {
            InitialName::Vacuum => Ok(DensityBlocks::vacuum()),
            InitialName::Single1 => DensityBlocks::single(one, zero),
            InitialName::Single2 => DensityBlocks::single(zero, one),
            InitialName::BellPlus => DensityBlocks::single(one * inv, one * inv),
            InitialName::BellMinus => DensityBlocks::single(one * inv, -one * inv),
            InitialName::Explicit => {
                let (Some(r1), Some(r2)) = (init.rho1, init.rho2) else {
                    return Err(Error::Config("initial.state: explicit needs rho1 and rho2".into()));
                };
                let block = |r: RawBlock| {
                    ComplexMat2::new(
                        C64::new(r[0][0][0], r[0][0][1]),
                        C64::new(r[0][1][0], r[0][1][1]),
                        C64::new(r[1][0][0], r[1][0][1]),
                        C64::new(r[1][1][0], r[1][1][1]),
                    )
                };
                DensityBlocks::new(block(r1), block(r2))
            }
        };
        if init.state != InitialName::Explicit && (init.rho1.is_some() || init.rho2.is_some()) {
            return Err(Error::Config("initial.rho1: blocks only allowed with state = \"explicit\"".into()));
        }
        state.map_err(|e| match e {
            Error::Config(m) | Error::Invariant(m) => Error::Config(format!("initial.rho1: {m}")),
            other => other,
        })
    }

    /// Copy with one named parameter replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let both = |c: &mut Self, f: &dyn Fn(&mut LeadSection)| {
            f(&mut c.left);
            f(&mut c.right);
        };
        match name {
            "eps1" => c.system.eps1 = value,
            "eps2" => c.system.eps2 = value,
            "eps" => {
                c.system.eps1 = value;
                c.system.eps2 = value;
            }
            "mu1" => c.left.mu = value,
            "mu2" => c.right.mu = value,
            "mu" => both(&mut c, &|l| l.mu = value),
            "g" => c.system.g = value,
            "d" => both(&mut c, &|l| l.d = value),
            "k_t" => both(&mut c, &|l| l.k_t = value),
            "gamma" => both(&mut c, &|l| l.gamma = value),
            "omega_cut" => both(&mut c, &|l| l.omega_cut = Some(value)),
            other => return Err(Error::Config(format!("sweep.axes: unknown parameter `{other}`"))),
        }
        Ok(c)
    }
}
