//! Configuration, scenarios and the command verbs behind the `bvtrack`
//! binary.

pub mod checks;
pub mod config;
pub mod run;
pub mod scenario;

pub use config::RunConfig;
pub use run::{converge, run, verify, RunOutcome};
