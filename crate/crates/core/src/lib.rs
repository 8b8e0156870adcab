//! Pulse-level simulation of a linear chain of spin-1/2 nuclei with first-
//! and second-neighbour Ising couplings, driven by resonant rf pulses.
//!
//! [`model`] holds the static spectrum, [`dynamics`] integrates the
//! interaction-picture amplitudes through pulse programs, [`ideal`] is the
//! exact gate-level reference, [`metrics`] scores runs, and [`config`] /
//! [`experiment`] drive everything from experiment files.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod ideal;
pub mod metrics;
pub mod model;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
