//! Configuration files, experiment drivers and table output for the
//! `fermidot` binary.

pub mod config;
pub mod run;
pub mod table;

pub use config::{ExperimentConfig, SolverName, SweepAxis};
pub use run::{run_classify, run_evolution, run_sweep, run_verify};
pub use table::Table;

use crate::error::Error;

/// Process exit code for an error: 2 configuration, 3 solver, 4 invariant.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Invariant(_) => 4,
        Error::InsideBand(..)
        | Error::Solver(_)
        | Error::SingularFluctuation(_)
        | Error::Poles(_)
        | Error::Unsupported(_)
        | Error::Io(_) => 3,
    }
}
