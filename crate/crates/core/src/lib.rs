//! Memristor-based Chua's circuit toolkit.
//!
//! The crate covers the full pipeline: fitting the device's static I-V
//! polynomial, designing the passive components so the circuit has three
//! unstable equilibria inside the device's safe voltage window, integrating
//! the state equations and classifying/sweeping the resulting trajectories.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod config;
pub mod design;
pub mod device;
pub mod error;
pub mod integrate;

pub use circuit::{CircuitParams, EquilibriumLabel, EquilibriumPoint, StateVector};
pub use design::{DesignReport, DesignSpec};
pub use device::{DevicePoly, DeviceState, IvSample, StateTable};
pub use error::{Error, Result};
pub use integrate::{IntegrationConfig, Trajectory};
