//! Out-of-time-ordered correlators `C_ij(t) = −4⟨ψ₀|[xᵢ(t), y_j]²|ψ₀⟩`.
//!
//! `B = [xᵢ(t), y_j]` is anti-Hermitian, so `C = 4‖B ψ₀‖²`. In the energy
//! eigenbasis `xᵢ(t) = e^{iEt} Xᵢ e^{−iEt}` and `B ψ₀` costs a handful of
//! matrix-vector products per time point.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::Eigensystem;
use super::{Result, SpectralError};
use crate::model::FockDimension;
use crate::quantum::{propagate, HamiltonianOp, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    /// `x = (a + a†)/2`
    X,
    /// `y = (a − a†)/(2i)`
    Y,
}

fn check_mode(mode: usize) -> Result<()> {
    if mode == 1 || mode == 2 {
        Ok(())
    } else {
        Err(SpectralError::InvalidConfig(format!(
            "mode index must be 1 or 2, got {mode}"
        )))
    }
}

/// Applies `xᵢ` or `yᵢ` to every column of `m`, whose rows run over the
/// photon-number basis.
fn apply_quadrature_rows(dim: FockDimension, mode: usize, q: Quadrature, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n_max = dim.n_max();
    // ⟨n|x|n±1⟩ = √(n or n+1)/2 ; ⟨n|y|n+1⟩ = −i√(n+1)/2, ⟨n|y|n−1⟩ = i√n/2
    let (up, down) = match q {
        Quadrature::X => (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)),
        Quadrature::Y => (Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5)),
    };
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for row in 0..m.nrows() {
        let (n1, n2) = dim.occupation(row);
        let n = if mode == 1 { n1 } else { n2 };
        let shifted = |k: usize| if mode == 1 { dim.index(k, n2) } else { dim.index(n1, k) };
        if n < n_max {
            let src = shifted(n + 1);
            let f = up * ((n + 1) as f64).sqrt();
            for col in 0..m.ncols() {
                out[(row, col)] += f * m[(src, col)];
            }
        }
        if n > 0 {
            let src = shifted(n - 1);
            let f = down * (n as f64).sqrt();
            for col in 0..m.ncols() {
                out[(row, col)] += f * m[(src, col)];
            }
        }
    }
    out
}

/// `xᵢ ψ` or `yᵢ ψ` in the truncated basis.
pub fn apply_quadrature(psi: &StateVector, mode: usize, q: Quadrature) -> Result<StateVector> {
    check_mode(mode)?;
    let dim = psi.fock();
    let col = DMatrix::from_column_slice(dim.total(), 1, psi.amplitudes());
    let out = apply_quadrature_rows(dim, mode, q, &col);
    Ok(StateVector::from_amplitudes(dim, out.as_slice().to_vec())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtocResult {
    pub i: usize,
    pub j: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest `|Im(−4⟨ψ₀|B²|ψ₀⟩)|` over the series, when requested.
    pub max_imaginary: Option<f64>,
}

/// Precomputed eigenbasis operators for repeated OTOC evaluation.
pub struct OtocEvaluator<'a> {
    eig: &'a Eigensystem,
    x: [DMatrix<Complex64>; 2],
    y: [DMatrix<Complex64>; 2],
}

impl<'a> OtocEvaluator<'a> {
    /// Transforms `x₁, x₂, y₁, y₂` into the eigenbasis (four dense products).
    pub fn new(eig: &'a Eigensystem) -> Self {
        let v = eig.vectors();
        let vh = v.adjoint();
        let dim = eig.fock();
        let op = |mode, q| &vh * apply_quadrature_rows(dim, mode, q, v);
        Self {
            eig,
            x: [op(1, Quadrature::X), op(2, Quadrature::X)],
            y: [op(1, Quadrature::Y), op(2, Quadrature::Y)],
        }
    }

    fn coefficients(&self, psi0: &StateVector) -> Result<DVector<Complex64>> {
        if psi0.fock() != self.eig.fock() {
            return Err(SpectralError::DimensionMismatch {
                expected: self.eig.len(),
                got: psi0.amplitudes().len(),
            });
        }
        Ok(self
            .eig
            .vectors()
            .ad_mul(&DVector::from_column_slice(psi0.amplitudes())))
    }

    /// `C_ij(t)` for each requested time. With `check_reality` the full
    /// expectation is also formed and its imaginary residue reported.
    pub fn evaluate(
        &self,
        psi0: &StateVector,
        i: usize,
        j: usize,
        times: &[f64],
        check_reality: bool,
    ) -> Result<OtocResult> {
        check_mode(i)?;
        check_mode(j)?;
        let c = self.coefficients(psi0)?;
        let x = &self.x[i - 1];
        let y = &self.y[j - 1];
        let yc = y * &c;
        let energies = self.eig.energies();

        let x_t = |v: &DVector<Complex64>, t: f64| -> DVector<Complex64> {
            let mut w = DVector::from_fn(v.len(), |k, _| v[k] * Complex64::from_polar(1.0, -energies[k] * t));
            w = x * w;
            for (k, z) in w.iter_mut().enumerate() {
                *z *= Complex64::from_polar(1.0, energies[k] * t);
            }
            w
        };
        let commutator = |v: &DVector<Complex64>, yv: &DVector<Complex64>, t: f64| x_t(yv, t) - y * x_t(v, t);

        let per_time: Vec<(f64, f64)> = times
            .par_iter()
            .map(|&t| {
                let b = commutator(&c, &yc, t);
                let value = 4.0 * b.norm_squared();
                let residue = if check_reality {
                    let bb = commutator(&b, &(y * &b), t);
                    (-4.0 * c.dotc(&bb)).im.abs()
                } else {
                    0.0
                };
                (value, residue)
            })
            .collect();
        Ok(OtocResult {
            i,
            j,
            times: times.to_vec(),
            values: per_time.iter().map(|p| p.0).collect(),
            max_imaginary: check_reality.then(|| per_time.iter().map(|p| p.1).fold(0.0, f64::max)),
        })
    }
}

/// One-shot [`OtocEvaluator`] evaluation.
pub fn quantum_otoc(eig: &Eigensystem, psi0: &StateVector, i: usize, j: usize, times: &[f64]) -> Result<OtocResult> {
    OtocEvaluator::new(eig).evaluate(psi0, i, j, times, false)
}

/// `C_ij(t)` by explicit RK4 propagation: `xᵢ(t)φ = U(t)† xᵢ U(t) φ`.
///
/// Independent of the eigendecomposition; `t` must be a whole number of
/// steps `dt`.
pub fn direct_otoc(h: &impl HamiltonianOp, psi0: &StateVector, i: usize, j: usize, t: f64, dt: f64) -> Result<f64> {
    check_mode(i)?;
    check_mode(j)?;
    if !(dt > 0.0 && t >= 0.0) {
        return Err(SpectralError::InvalidConfig(format!(
            "need dt > 0 and t ≥ 0, got dt = {dt}, t = {t}"
        )));
    }
    let steps = (t / dt).round() as usize;
    let heisenberg_x = |phi: &StateVector| -> Result<StateVector> {
        let forward = propagate(phi, h, dt, steps)?;
        let kicked = apply_quadrature(&forward, i, Quadrature::X)?;
        Ok(propagate(&kicked, h, -dt, steps)?)
    };
    let y_psi = apply_quadrature(psi0, j, Quadrature::Y)?;
    let first = heisenberg_x(&y_psi)?;
    let second = apply_quadrature(&heisenberg_x(psi0)?, j, Quadrature::Y)?;
    let b: f64 = first
        .amplitudes()
        .iter()
        .zip(second.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(4.0 * b)
}

/// OTOC initial state `|i y₁⟩|i y₂⟩` with `(y₁, y₂) = r(cos θ, sin θ)`.
pub fn otoc_initial_state(dim: FockDimension, radius: f64, angle: f64) -> StateVector {
    StateVector::coherent_product(
        dim,
        Complex64::new(0.0, radius * angle.cos()),
        Complex64::new(0.0, radius * angle.sin()),
    )
    .normalized()
}
