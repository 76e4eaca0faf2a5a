//! Experiment drivers behind the `msf` binary: configuration, output files,
//! scenario runs and the verification suite.

pub mod config;
pub mod output;
pub mod run;
pub mod verify;

pub use config::{Overrides, RunConfig, Scenario};
pub use run::{run_classical, run_coherent, run_evolve, run_spectrum, run_sweep};
pub use verify::{criterion, run_verify, CheckResult, VerifyContext, VerifyReport};

use crate::error::Error;

/// Process exit status for a failed run: 2 for bad input, 3 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Sector(_) | Error::Domain { .. } | Error::Io(_) => 2,
        Error::NoConvergence { .. }
        | Error::Quadrature { .. }
        | Error::Overflow { .. }
        | Error::Budget { .. }
        | Error::TailMass { .. }
        | Error::Branch { .. }
        | Error::Degenerate(_) => 3,
    }
}
