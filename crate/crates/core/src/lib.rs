//! Optimistic average-reward learning in factored MDPs.
//!
//! The crate is organized bottom-up:
//! [`fmdp`] holds the model representation, [`oracles`] solves known models exactly,
//! [`confidence`] and [`planning`] build and solve optimistic models,
//! [`agents`] implements the learners, [`environments`] ships the benchmarks,
//! [`verification`] checks the supporting inequalities numerically and
//! [`harness`] runs seeded experiments.

pub mod error;
pub mod fmdp;

pub use error::{Error, Result};
pub mod oracles;
pub mod confidence;
pub mod planning;
pub mod environments;
pub mod agents;
pub mod harness;
pub mod verification;
