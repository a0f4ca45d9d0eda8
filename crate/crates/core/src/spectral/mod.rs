//! Energy eigenbasis diagnostics: OTOCs and level-spacing statistics.

mod eigen;
mod otoc;
mod parity;
mod simplex;
mod spacing;

pub use eigen::{eigendecompose, Eigensystem};
pub use otoc::{
    apply_quadrature, direct_otoc, otoc_initial_state, quantum_otoc, OtocEvaluator, OtocResult, Quadrature,
};
pub use parity::{even_energies, even_mass, parity_split, repair_parity, ParitySplit, PARITY_TOL};
pub use spacing::{
    brody_cumulative, brody_fit, cumulative_counts, level_spacings, select_spacings, smallest_spacings,
    synthetic_poisson_spacings, synthetic_wigner_spacings, SpacingFit, SpacingSelection, MIN_FIT_SPACINGS,
};

use thiserror::Error;

use crate::quantum::QuantumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not Hermitian (max |H − H†| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("eigenvector {index} has mixed parity (even mass {even_mass})")]
    AmbiguousParity { index: usize, even_mass: f64 },
    #[error("need {needed} levels, only {available} available")]
    InsufficientLevels { needed: usize, available: usize },
    #[error("need at least {min} spacings for a fit, got {got}")]
    TooFewSpacings { got: usize, min: usize },
    #[error("spacings are all equal; the fit is undefined")]
    DegenerateSpacings,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub type Result<T, E = SpectralError> = std::result::Result<T, E>;
