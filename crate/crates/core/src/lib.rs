//! Spin-1/2 Aharonov-Bohm scattering from a finite-radius magnetized
//! filament.
//!
//! The pipeline runs bottom-up:
//!
//! * [`specfun`]: Bessel functions of real order;
//! * [`filament`]: radial matching at the flux tube surface and the
//!   `R -> 0` phase shifts under either boundary-condition prescription;
//! * [`amplitude`]: partial-wave resummation into the spin amplitude matrix;
//! * [`polarimetry`]: the polarized cross section, its density-matrix
//!   oracle and the two limiting cases.

pub mod amplitude;
pub mod error;
pub mod exec;
pub mod extrapolate;
pub mod filament;
pub mod polarimetry;
pub mod specfun;

pub use error::{Error, Result};
