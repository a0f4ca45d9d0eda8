//! Wigner and Husimi functions in the photon-number basis.
//!
//! Both quasi-probabilities share the form
//!
//! ```text
//! F(α₁, α₂) = c · Σ A₁[m₁,n₁] A₂[m₂,n₂] ψ_{n₁,n₂} ψ*_{m₁,m₂}
//! ```
//!
//! with a per-mode kernel `A`: `D_{m,n}(2α)(−1)ⁿ` and `c = (2/π)²` for Wigner,
//! `⟨m|α⟩⟨α|n⟩` and `c = 1/π²` for Husimi. Integrating the mode-2 kernel over
//! `x₂` (at `y₂ = 0`) gives the marginal kernels used by the surface of
//! section.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::fock::{coherent_amplitudes, displacement_matrix, marginal_x2_husimi_matrix, marginal_x2_wigner_matrix};
use super::state::StateVector;
use super::{QuantumError, Result};

/// Largest tolerated imaginary residue of a Wigner value.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuasiKind {
    Wigner,
    Husimi,
}

impl QuasiKind {
    pub fn name(self) -> &'static str {
        match self {
            QuasiKind::Wigner => "wigner",
            QuasiKind::Husimi => "husimi",
        }
    }

    pub fn prefactor(self) -> f64 {
        match self {
            QuasiKind::Wigner => 4.0 / (PI * PI),
            QuasiKind::Husimi => 1.0 / (PI * PI),
        }
    }

    /// Per-mode kernel `A(α)` for a point of phase space.
    pub fn kernel(self, alpha: Complex64, n_max: usize) -> DMatrix<Complex64> {
        match self {
            QuasiKind::Wigner => {
                let mut d = displacement_matrix(2.0 * alpha, n_max);
                for n in (1..=n_max).step_by(2) {
                    d.column_mut(n).neg_mut();
                }
                d
            }
            QuasiKind::Husimi => {
                let c = coherent_amplitudes(alpha, n_max);
                DMatrix::from_fn(n_max + 1, n_max + 1, |m, n| c[m] * c[n].conj())
            }
        }
    }

    /// Mode-2 kernel integrated over `x₂` at `y₂ = 0`.
    pub fn x2_marginal_kernel(self, n_max: usize) -> DMatrix<Complex64> {
        match self {
            QuasiKind::Wigner => {
                let m = marginal_x2_wigner_matrix(n_max);
                DMatrix::from_fn(n_max + 1, n_max + 1, |r, c| {
                    let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::new(sign * m[(r, c)], 0.0)
                })
            }
            QuasiKind::Husimi => {
                // ∫ ⟨m|x⟩⟨x|n⟩ dx is symmetric in (m, n)
                marginal_x2_husimi_matrix(n_max).map(|v| Complex64::new(v, 0.0))
            }
        }
    }
}

/// `c · Σ A₁[m₁,n₁] A₂[m₂,n₂] ψ_{n₁n₂} ψ*_{m₁m₂}` as a complex number.
pub(crate) fn contract(
    psi: &StateVector,
    a1: &DMatrix<Complex64>,
    a2: &DMatrix<Complex64>,
    prefactor: f64,
) -> Complex64 {
    let m = psi.as_matrix();
    let phi = a1 * &m * a2.transpose();
    let value: Complex64 = m.iter().zip(phi.iter()).map(|(p, q)| p.conj() * q).sum();
    value * prefactor
}

fn real_or_residue(value: Complex64) -> Result<f64> {
    if value.im.abs() > IMAGINARY_RESIDUE_LIMIT * value.re.abs().max(1.0) {
        return Err(QuantumError::ImaginaryResidue {
            real: value.re,
            imag: value.im,
        });
    }
    Ok(value.re)
}

/// Wigner function `W(α₁, α₂)` of a pure state.
pub fn wigner(psi: &StateVector, alpha1: Complex64, alpha2: Complex64) -> Result<f64> {
    let n_max = psi.fock().n_max();
    let a1 = QuasiKind::Wigner.kernel(alpha1, n_max);
    let a2 = QuasiKind::Wigner.kernel(alpha2, n_max);
    real_or_residue(contract(psi, &a1, &a2, QuasiKind::Wigner.prefactor()))
}

/// Husimi function `Q(α₁, α₂) = |⟨α₁, α₂|ψ⟩|²/π²`.
pub fn husimi(psi: &StateVector, alpha1: Complex64, alpha2: Complex64) -> f64 {
    let n_max = psi.fock().n_max();
    let c1 = coherent_amplitudes(alpha1, n_max);
    let c2 = coherent_amplitudes(alpha2, n_max);
    let d = n_max + 1;
    let amps = psi.amplitudes();
    let mut overlap = Complex64::new(0.0, 0.0);
    for n1 in 0..d {
        let mut row = Complex64::new(0.0, 0.0);
        for n2 in 0..d {
            row += c2[n2].conj() * amps[n1 * d + n2];
        }
        overlap += c1[n1].conj() * row;
    }
    overlap.norm_sqr() / (PI * PI)
}

/// `∫ dx₂ W(x₁, x₂, y₁, 0)` with `α₁ = x₁ + i y₁`.
pub fn wigner_x2_marginal(psi: &StateVector, alpha1: Complex64) -> Result<f64> {
    let n_max = psi.fock().n_max();
    let a1 = QuasiKind::Wigner.kernel(alpha1, n_max);
    let a2 = QuasiKind::Wigner.x2_marginal_kernel(n_max);
    real_or_residue(contract(psi, &a1, &a2, QuasiKind::Wigner.prefactor()))
}

/// `∫ dx₂ Q(x₁, x₂, y₁, 0)` with `α₁ = x₁ + i y₁`.
pub fn husimi_x2_marginal(psi: &StateVector, alpha1: Complex64) -> f64 {
    let n_max = psi.fock().n_max();
    let a1 = QuasiKind::Husimi.kernel(alpha1, n_max);
    let a2 = QuasiKind::Husimi.x2_marginal_kernel(n_max);
    contract(psi, &a1, &a2, QuasiKind::Husimi.prefactor()).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FockDimension;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dim(n: usize) -> FockDimension {
        FockDimension::new(n).unwrap()
    }

    #[test]
    fn vacuum_values() {
        let psi = StateVector::vacuum(dim(30));
        let w = wigner(&psi, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!((w - 4.0 / (PI * PI)).abs() < 1e-12);
        assert!((w - 0.40528).abs() < 1e-5);
        let w = wigner(&psi, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!((w - 4.0 / (PI * PI) * (-2.0f64).exp()).abs() < 1e-12);
        assert!((w - 0.05485).abs() < 1e-5);
        let q = husimi(&psi, c(0.0, 0.0), c(0.0, 0.0));
        assert!((q - 1.0 / (PI * PI)).abs() < 1e-12);
        assert!((q - 0.10132).abs() < 1e-5);
    }

    #[test]
    fn single_photon_wigner_is_negative_at_origin() {
        let psi = StateVector::basis(dim(30), 1, 0);
        let w = wigner(&psi, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!((w + 4.0 / (PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn husimi_peaks_at_coherent_amplitude() {
        let b1 = c(0.4, -0.3);
        let b2 = c(-0.2, 0.6);
        let psi = StateVector::coherent_product(dim(30), b1, b2);
        assert!((husimi(&psi, b1, b2) - 1.0 / (PI * PI)).abs() < 1e-12);
        assert!(husimi(&psi, b1 + 0.3, b2) < 1.0 / (PI * PI));
    }

    #[test]
    fn coherent_wigner_is_gaussian() {
        let b1 = c(0.5, 0.2);
        let b2 = c(-0.3, 0.1);
        let psi = StateVector::coherent_product(dim(30), b1, b2);
        for (a1, a2) in [(c(0.1, 0.3), c(0.0, 0.0)), (c(0.9, -0.2), c(-0.5, 0.4))] {
            let want = 4.0 / (PI * PI) * (-2.0 * ((a1 - b1).norm_sqr() + (a2 - b2).norm_sqr())).exp();
            assert!((wigner(&psi, a1, a2).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn kernels_match_closed_forms_for_vacuum_marginals() {
        let psi = StateVector::vacuum(dim(10));
        // ∫ dx₂ (2/π)² e^{−2|α₁|²} e^{−2x₂²} = (2/π)² √(π/2) e^{−2|α₁|²}
        let a1 = c(0.3, -0.4);
        let w = wigner_x2_marginal(&psi, a1).unwrap();
        let want = 4.0 / (PI * PI) * (PI / 2.0).sqrt() * (-2.0 * a1.norm_sqr()).exp();
        assert!((w - want).abs() < 1e-14);
        let q = husimi_x2_marginal(&psi, a1);
        let want = PI.sqrt() / (PI * PI) * (-a1.norm_sqr()).exp();
        assert!((q - want).abs() < 1e-14);
    }

    #[test]
    fn kernel_parity_convention() {
        // Wigner kernel at the origin is the parity operator (−1)ⁿ.
        let k = QuasiKind::Wigner.kernel(c(0.0, 0.0), 6);
        for n in 0..=6 {
            let want = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(k[(n, n)], c(want, 0.0));
        }
    }
}
