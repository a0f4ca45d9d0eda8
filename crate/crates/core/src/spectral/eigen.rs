use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Result, SpectralError};
use crate::model::{FockDimension, HermitianMatrix};

/// Largest tolerated `|H − H†|` entry relative to `‖H‖_F`.
const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenpairs of a Hamiltonian, energies ascending, eigenvectors as columns
/// over the photon-number basis.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    fock: FockDimension,
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    pub fn fock(&self) -> FockDimension {
        self.fock
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub(crate) fn vectors_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.vectors
    }

    /// `max_k ‖H v_k − E_k v_k‖`.
    pub fn max_residual(&self, h: &HermitianMatrix) -> f64 {
        let hv = h.matrix() * &self.vectors;
        (0..self.len())
            .map(|k| {
                let e = self.energies[k];
                hv.column(k)
                    .iter()
                    .zip(self.vectors.column(k).iter())
                    .map(|(a, v)| (a - v * e).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max_{jk} |⟨v_j|v_k⟩ − δ_jk|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.vectors.adjoint() * &self.vectors;
        let mut worst = 0.0f64;
        for j in 0..g.ncols() {
            for i in 0..g.nrows() {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - delta).norm());
            }
        }
        worst
    }

    /// `‖V D V† − H‖_F / ‖H‖_F`.
    pub fn reconstruction_error(&self, h: &HermitianMatrix) -> f64 {
        let mut vd = self.vectors.clone();
        for (k, &e) in self.energies.iter().enumerate() {
            vd.column_mut(k).scale_mut(e);
        }
        let diff = vd * self.vectors.adjoint() - h.matrix();
        diff.norm() / h.frobenius_norm().max(f64::MIN_POSITIVE)
    }
}

/// Full spectrum of a Hermitian matrix.
///
/// Real matrices take the real symmetric path, which is several times
/// faster than the complex one.
pub fn eigendecompose(h: &HermitianMatrix) -> Result<Eigensystem> {
    let m = h.matrix();
    let n = m.nrows();
    let scale = h.frobenius_norm();
    let mut deviation = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            deviation = deviation.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if deviation > HERMITICITY_TOL * scale.max(1.0) {
        return Err(SpectralError::NotHermitian { deviation });
    }

    // nalgebra counts QR sweeps over the whole matrix
    let max_sweeps = 100 * n.max(1);
    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = if h.is_real() {
        let e = m
            .map(|z| z.re)
            .try_symmetric_eigen(f64::EPSILON, max_sweeps)
            .ok_or(SpectralError::NoConvergence)?;
        (
            e.eigenvalues.iter().copied().collect(),
            e.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let e = m
            .clone()
            .try_symmetric_eigen(f64::EPSILON, max_sweeps)
            .ok_or(SpectralError::NoConvergence)?;
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let energies = order.iter().map(|&k| values[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Ok(Eigensystem {
        fock: h.fock(),
        energies,
        vectors,
    })
}

#[cfg(test)]
pub(crate) fn from_parts(fock: FockDimension, energies: Vec<f64>, vectors: DMatrix<Complex64>) -> Eigensystem {
    Eigensystem {
        fock,
        energies,
        vectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, ModelParams};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kerr_only_spectrum_is_the_diagonal() {
        let params = ModelParams {
            p1: 0.0,
            p2: 0.0,
            xi0: 0.0,
            ..ModelParams::default()
        };
        let dim = FockDimension::new(6).unwrap();
        let h = build_hamiltonian(&params, dim);
        let eig = eigendecompose(&h).unwrap();
        let mut want: Vec<f64> = (0..dim.total())
            .map(|k| {
                let (n1, n2) = dim.occupation(k);
                0.5 * (n1 * n1.saturating_sub(1) + n2 * n2.saturating_sub(1)) as f64
            })
            .collect();
        want.sort_by(f64::total_cmp);
        assert_eq!(eig.energies(), &want[..]);
    }

    #[test]
    fn two_by_two_hopping() {
        // smallest valid Fock space; embed [[0, −1], [−1, 0]] in the (0,1),(1,0) block
        let dim = FockDimension::new(2).unwrap();
        let mut m = DMatrix::zeros(9, 9);
        m[(dim.index(0, 1), dim.index(1, 0))] = c(-1.0);
        m[(dim.index(1, 0), dim.index(0, 1))] = c(-1.0);
        let eig = eigendecompose(&HermitianMatrix::from_dense(dim, m)).unwrap();
        assert!((eig.energies()[0] + 1.0).abs() < 1e-15);
        assert!((eig.energies()[8] - 1.0).abs() < 1e-15);
        assert_eq!(eig.energies().iter().filter(|e| e.abs() < 1e-15).count(), 7);
    }

    #[test]
    fn complex_hermitian_path() {
        let dim = FockDimension::new(2).unwrap();
        let mut m = DMatrix::zeros(9, 9);
        for k in 0..9 {
            m[(k, k)] = c(k as f64);
        }
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        m[(1, 0)] = Complex64::new(0.0, -1.0);
        let h = HermitianMatrix::from_dense(dim, m);
        let eig = eigendecompose(&h).unwrap();
        // [[0, i], [−i, 1]] → (1 ∓ √5)/2
        assert!((eig.energies()[0] - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!(eig.max_residual(&h) < 1e-12);
        assert!(eig.orthonormality_error() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let dim = FockDimension::new(2).unwrap();
        let mut m = DMatrix::zeros(9, 9);
        m[(0, 1)] = c(1.0);
        assert!(matches!(
            eigendecompose(&HermitianMatrix::from_dense(dim, m)),
            Err(SpectralError::NotHermitian { .. })
        ));
    }

    #[test]
    fn coupled_spectrum_invariants() {
        let dim = FockDimension::new(12).unwrap();
        let h = build_hamiltonian(&ModelParams::with_coupling(1.0), dim);
        let eig = eigendecompose(&h).unwrap();
        let norm = h.frobenius_norm();
        assert!(eig.max_residual(&h) <= 1e-8 * norm);
        assert!(eig.orthonormality_error() <= 1e-10);
        assert!(eig.reconstruction_error(&h) <= 1e-7);
        assert!(eig.energies().windows(2).all(|w| w[0] <= w[1]));
    }
}
