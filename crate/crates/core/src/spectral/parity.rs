use nalgebra::DMatrix;
use num_complex::Complex64;

use super::eigen::Eigensystem;
use super::{Result, SpectralError};

/// A state is assigned a parity when its mass on the other sector is below this.
pub const PARITY_TOL: f64 = 1e-8;

/// Eigenvalues closer than this (relative to the spectral radius) count as
/// degenerate when repairing parity.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParitySplit {
    /// Indices into the eigensystem with even `n₁ + n₂`, ascending in energy.
    pub even: Vec<usize>,
    pub odd: Vec<usize>,
}

fn is_even_index(eig: &Eigensystem, row: usize) -> bool {
    let (n1, n2) = eig.fock().occupation(row);
    (n1 + n2) % 2 == 0
}

/// Probability of eigenvector `k` on even-`(n₁ + n₂)` basis states.
pub fn even_mass(eig: &Eigensystem, k: usize) -> f64 {
    eig.vectors()
        .column(k)
        .iter()
        .enumerate()
        .filter(|(row, _)| is_even_index(eig, *row))
        .map(|(_, v)| v.norm_sqr())
        .sum()
}

fn is_ambiguous(mass: f64) -> bool {
    mass > PARITY_TOL && mass < 1.0 - PARITY_TOL
}

/// Classifies eigenvectors by total photon-number parity.
pub fn parity_split(eig: &Eigensystem) -> Result<ParitySplit> {
    let mut split = ParitySplit {
        even: Vec::new(),
        odd: Vec::new(),
    };
    for k in 0..eig.len() {
        let mass = even_mass(eig, k);
        if is_ambiguous(mass) {
            return Err(SpectralError::AmbiguousParity {
                index: k,
                even_mass: mass,
            });
        }
        if mass >= 1.0 - PARITY_TOL {
            split.even.push(k);
        } else {
            split.odd.push(k);
        }
    }
    Ok(split)
}

/// Rotates eigenvectors inside degenerate clusters onto parity eigenstates.
///
/// Returns the number of clusters that were rotated. A mixed-parity vector
/// outside any degenerate cluster cannot be repaired and is reported as
/// [`SpectralError::AmbiguousParity`].
pub fn repair_parity(eig: &mut Eigensystem) -> Result<usize> {
    let n = eig.len();
    let radius = eig.energies().iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let tol = DEGENERACY_TOL * radius;
    let parity: Vec<f64> = (0..n)
        .map(|row| if is_even_index(eig, row) { 1.0 } else { -1.0 })
        .collect();

    let mut repaired = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.energies()[end] - eig.energies()[end - 1] <= tol {
            end += 1;
        }
        let ambiguous: Vec<usize> = (start..end).filter(|&k| is_ambiguous(even_mass(eig, k))).collect();
        if let Some(&k) = ambiguous.first() {
            if end - start == 1 {
                return Err(SpectralError::AmbiguousParity {
                    index: k,
                    even_mass: even_mass(eig, k),
                });
            }
            let width = end - start;
            let block = eig.vectors().columns(start, width).into_owned();
            let p_block = DMatrix::from_fn(width, width, |a, b| {
                block
                    .column(a)
                    .iter()
                    .zip(block.column(b).iter())
                    .zip(&parity)
                    .map(|((va, vb), p)| va.conj() * vb * *p)
                    .sum::<Complex64>()
            });
            let rotation = p_block.symmetric_eigen().eigenvectors;
            let rotated = block * rotation;
            eig.vectors_mut().columns_mut(start, width).copy_from(&rotated);
            repaired += 1;
        }
        start = end;
    }
    Ok(repaired)
}

/// Energies of the even-parity eigenstates, ascending.
pub fn even_energies(eig: &Eigensystem, split: &ParitySplit) -> Vec<f64> {
    split.even.iter().map(|&k| eig.energies()[k]).collect()
}
