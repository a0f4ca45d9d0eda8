//! Schrödinger evolution in the truncated two-mode photon-number basis and
//! the phase-space quasi-probabilities built on it.

mod accumulate;
mod evolve;
pub mod fock;
mod grid;
mod quasi;
mod state;

pub use accumulate::{accumulate_quantum_mpmp, accumulate_quantum_sos, quantum_mpmp_grids, quantum_sos_grids};
pub use evolve::{evolve, propagate, EvolutionConfig, HamiltonianOp, Sample, NORM_DRIFT_LIMIT};
pub use fock::{
    coherent_state, displacement_element, displacement_matrix, marginal_x2_husimi_matrix, marginal_x2_wigner_matrix,
};
pub use grid::{Axis, Diagnostic, Grid2D, GridMetadata, GridSpec};
pub use quasi::{husimi, husimi_x2_marginal, wigner, wigner_x2_marginal, QuasiKind, IMAGINARY_RESIDUE_LIMIT};
pub use state::{InitialState, StateVector};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("norm drifted by {drift:e} at t = {t}; reduce dt or raise n_max")]
    NormDrift { t: f64, drift: f64 },
    #[error("quasi-probability has imaginary residue {imag:e} (real part {real})")]
    ImaginaryResidue { real: f64, imag: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T, E = QuantumError> = std::result::Result<T, E>;
