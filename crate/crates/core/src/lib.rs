//! Quasi-systematic sampling of continuous populations on the unit interval.
//!
//! The crate provides samplers for the binomial, Poisson, systematic,
//! systematic-Poisson and systematic-binomial point processes on `(0, 1)`,
//! their exact first, second and n-th order inclusion densities,
//! Horvitz-Thompson mean estimation with the Cordy and Sen-Yates-Grundy
//! variance estimators, and a deterministic parallel Monte Carlo harness.

pub mod checks;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod expr;
pub mod numerics;
pub mod output;
pub mod processes;
pub mod simulation;
pub mod stats;

pub use error::{Error, Result};
