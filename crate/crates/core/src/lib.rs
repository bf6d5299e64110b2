//! Exact non-Markovian dynamics and fermionic-mode entanglement of a
//! double quantum dot coupled to two fermionic reservoirs.

pub mod boundstate;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod greens;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use model::{ComplexMat2, ModelConfig, ReservoirParams, SpectralKind, SystemParams};
