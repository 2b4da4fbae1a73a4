//! Linear quantum model of a Fabry-Perot gravitational-wave probe in which the
//! test mass couples to its own radiated gravitational field.

pub mod cli;
pub mod commutator;
pub mod config;
pub mod error;
pub mod freq_response;
pub mod gauge;
pub mod gw_field;
pub mod io_noise;
pub mod model;
pub mod quad;

pub use error::{Error, Result};
pub use model::{derive_couplings, DerivedCouplings, Detector, Mass, PhysicalConstants, SystemParams};
