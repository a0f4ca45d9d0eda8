use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fock::coherent_state;
use super::{QuantumError, Result};
use crate::model::FockDimension;

/// Two-mode state `ψ_{n₁,n₂}` over the truncated photon-number basis,
/// flattened row-major in `(n₁, n₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: FockDimension,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(dim: FockDimension, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != dim.total() {
            return Err(QuantumError::DimensionMismatch {
                expected: dim.total(),
                got: amps.len(),
            });
        }
        Ok(Self { dim, amps })
    }

    pub fn vacuum(dim: FockDimension) -> Self {
        Self::basis(dim, 0, 0)
    }

    pub fn basis(dim: FockDimension, n1: usize, n2: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim.total()];
        amps[dim.index(n1, n2)] = Complex64::new(1.0, 0.0);
        Self { dim, amps }
    }

    /// Product of truncated coherent states `|α₁⟩|α₂⟩` (not renormalized).
    pub fn coherent_product(dim: FockDimension, alpha1: Complex64, alpha2: Complex64) -> Self {
        let c1 = coherent_state(alpha1, dim.n_max());
        let c2 = coherent_state(alpha2, dim.n_max());
        let amps = c1.iter().flat_map(|a| c2.iter().map(move |b| a * b)).collect();
        Self { dim, amps }
    }

    pub fn fock(&self) -> FockDimension {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn amplitude(&self, n1: usize, n2: usize) -> Complex64 {
        self.amps[self.dim.index(n1, n2)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
        self
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Amplitudes arranged as a `(n_max+1) × (n_max+1)` matrix `Ψ[n₁, n₂]`.
    pub fn as_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim.per_mode();
        DMatrix::from_fn(d, d, |n1, n2| self.amps[n1 * d + n2])
    }

    /// Total probability on basis states with odd `n₁ + n₂`.
    pub fn odd_parity_probability(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let (n1, n2) = self.dim.occupation(*k);
                (n1 + n2) % 2 == 1
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `(⟨n₁⟩, ⟨n₂⟩)`.
    pub fn mean_photons(&self) -> (f64, f64) {
        let mut m = (0.0, 0.0);
        for (k, a) in self.amps.iter().enumerate() {
            let (n1, n2) = self.dim.occupation(k);
            let p = a.norm_sqr();
            m.0 += n1 as f64 * p;
            m.1 += n2 as f64 * p;
        }
        m
    }

    /// `⟨ψ|H|ψ⟩` (real part).
    pub fn expectation(&self, h: &impl super::HamiltonianOp) -> f64 {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        h.apply(&self.amps, &mut out);
        self.amps
            .iter()
            .zip(&out)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .re
    }

    /// Total probability on basis states with `n₁ = n_max` or `n₂ = n_max`.
    pub fn edge_population(&self) -> f64 {
        let n_max = self.dim.n_max();
        self.amps
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let (n1, n2) = self.dim.occupation(*k);
                n1 == n_max || n2 == n_max
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Initial-state choices for the evolution runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    #[default]
    Vacuum,
    /// `|α₁⟩|α₂⟩` with `αᵢ = xᵢ + i yᵢ`, renormalized after truncation.
    Coherent { x1: f64, y1: f64, x2: f64, y2: f64 },
}

impl InitialState {
    pub fn build(&self, dim: FockDimension) -> StateVector {
        match *self {
            InitialState::Vacuum => StateVector::vacuum(dim),
            InitialState::Coherent { x1, y1, x2, y2 } => {
                StateVector::coherent_product(dim, Complex64::new(x1, y1), Complex64::new(x2, y2)).normalized()
            }
        }
    }
}
