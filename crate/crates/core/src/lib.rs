//! Full-duplex hybrid access point: channel model, MMSE training, beamforming,
//! SDR/SCA time-split optimization, closed-form rate bounds and Monte Carlo.

pub mod analysis;
pub mod beamforming;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod optimizer;
pub mod quadrature;

pub use error::{Error, Result};
