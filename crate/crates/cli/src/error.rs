use std::io;

use kpo_core::classical::ClassicalError;
use kpo_core::model::ModelError;
use kpo_core::quantum::QuantumError;
use kpo_core::spectral::SpectralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NotAMinimum { .. } | ModelError::MinimumNotConverged { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ClassicalError> for CliError {
    fn from(e: ClassicalError) -> Self {
        match e {
            ClassicalError::BlowUp { .. } => CliError::Numeric(e.to_string()),
            ClassicalError::Model(m) => m.into(),
            ClassicalError::InvalidConfig(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::NormDrift { .. } | QuantumError::ImaginaryResidue { .. } => CliError::Numeric(e.to_string()),
            QuantumError::Model(m) => m.into(),
            QuantumError::InvalidConfig(_) | QuantumError::DimensionMismatch { .. } => CliError::Config(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Quantum(q) => q.into(),
            SpectralError::InsufficientLevels { .. }
            | SpectralError::TooFewSpacings { .. }
            | SpectralError::InvalidConfig(_)
            | SpectralError::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            SpectralError::NotHermitian { .. }
            | SpectralError::NoConvergence
            | SpectralError::AmbiguousParity { .. }
            | SpectralError::DegenerateSpacings => CliError::Numeric(e.to_string()),
        }
    }
}
