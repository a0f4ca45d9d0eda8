//! Classical and quantum chaos diagnostics for two coupled Kerr-nonlinear
//! parametric oscillators.

pub mod classical;
pub mod model;
pub mod quantum;
pub mod rng;
pub mod spectral;
