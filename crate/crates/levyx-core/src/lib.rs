//! Simulation and path machinery for real Lévy processes: characteristic triplets,
//! path sampling, exact path operators, excursions and ladder processes, and the
//! pathwise construction of the process conditioned to stay positive.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
extern crate alloc;

pub mod algebra;
pub mod conditioned;
pub mod fluctuation;
pub mod levy;
pub mod math;
pub mod path;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use levy::{
    char_exponent, drift_classification, regularity_check, DriftClass, JumpLaw, JumpSpec, LevyError, LevyTriplet,
    Regularity,
};
pub use path::{Path, Point, Time};
pub use rng::RngStream;
pub use simulate::{sample_path, sample_path_exp_horizon, sample_path_from, SimError, Simulator};
