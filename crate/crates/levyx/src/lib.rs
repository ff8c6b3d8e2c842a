//! Verification harness for path identities of real Lévy processes: experiment
//! configs, the seed policy, self-contained JSON reports and CSV sample dumps.
//!
//! The simulation and path machinery lives in [`levyx_core`].

pub mod config;
pub mod experiments;
pub mod functional;
pub mod lambda;
pub mod output;
pub mod report;
pub mod runner;

pub use levyx_core;
