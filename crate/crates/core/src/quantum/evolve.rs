//! Fixed-step RK4 integration of `dψ/dt = −(i/ħ) H ψ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{InitialState, StateVector};
use super::{QuantumError, Result};
use crate::model::{BandedHamiltonian, HermitianMatrix};

/// Norm drift beyond this aborts an evolution.
pub const NORM_DRIFT_LIMIT: f64 = 1e-3;

/// Anything that can apply a Hamiltonian to a flattened state vector.
pub trait HamiltonianOp {
    fn dimension(&self) -> usize;
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]);
    fn hbar(&self) -> f64;
}

impl HamiltonianOp for HermitianMatrix {
    fn dimension(&self) -> usize {
        HermitianMatrix::dimension(self)
    }
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        HermitianMatrix::apply(self, v, out)
    }
    fn hbar(&self) -> f64 {
        HermitianMatrix::hbar(self)
    }
}

impl HamiltonianOp for BandedHamiltonian {
    fn dimension(&self) -> usize {
        BandedHamiltonian::dimension(self)
    }
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        BandedHamiltonian::apply(self, v, out)
    }
    fn hbar(&self) -> f64 {
        BandedHamiltonian::hbar(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Observer is invoked every `stride` steps.
    pub stride: usize,
    pub initial: InitialState,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 20.0,
            stride: 10,
            initial: InitialState::Vacuum,
        }
    }
}

impl EvolutionConfig {
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(QuantumError::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(QuantumError::InvalidConfig(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if self.stride == 0 {
            return Err(QuantumError::InvalidConfig("stride must be at least 1".into()));
        }
        let n = (self.t_final / self.dt).round();
        if (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) {
            return Err(QuantumError::InvalidConfig(format!(
                "t_final = {} is not a whole number of steps of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// State handed to the evolution observer.
#[derive(Debug)]
pub struct Sample<'a> {
    pub step: usize,
    pub t: f64,
    /// Left-Riemann weight: `dt` times the number of steps this sample stands for.
    pub weight: f64,
    pub state: &'a StateVector,
}

/// Reusable RK4 workspace.
struct Rk4Buffers {
    tmp: Vec<Complex64>,
    k: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            tmp: vec![z; n],
            k: vec![z; n],
            acc: vec![z; n],
        }
    }

    fn step(&mut self, h: &impl HamiltonianOp, psi: &mut [Complex64], dt: f64) {
        // f(v) = −(i/ħ) H v
        let minus_i = Complex64::new(0.0, -1.0 / h.hbar());
        let Rk4Buffers { tmp, k, acc } = self;

        h.apply(psi, k);
        for j in 0..psi.len() {
            let kj = minus_i * k[j];
            acc[j] = psi[j] + kj * (dt / 6.0);
            tmp[j] = psi[j] + kj * (0.5 * dt);
        }
        h.apply(tmp, k);
        for j in 0..psi.len() {
            let kj = minus_i * k[j];
            acc[j] += kj * (dt / 3.0);
            tmp[j] = psi[j] + kj * (0.5 * dt);
        }
        h.apply(tmp, k);
        for j in 0..psi.len() {
            let kj = minus_i * k[j];
            acc[j] += kj * (dt / 3.0);
            tmp[j] = psi[j] + kj * dt;
        }
        h.apply(tmp, k);
        for j in 0..psi.len() {
            psi[j] = acc[j] + minus_i * k[j] * (dt / 6.0);
        }
    }
}

/// Takes `steps` RK4 steps of signed size `dt` (negative runs backwards).
pub fn propagate(psi: &StateVector, h: &impl HamiltonianOp, dt: f64, steps: usize) -> Result<StateVector> {
    check_dimension(psi, h)?;
    let mut out = psi.clone();
    let mut buf = Rk4Buffers::new(h.dimension());
    for _ in 0..steps {
        buf.step(h, out.amplitudes_mut(), dt);
    }
    Ok(out)
}

fn check_dimension(psi: &StateVector, h: &impl HamiltonianOp) -> Result<()> {
    if psi.amplitudes().len() != h.dimension() {
        return Err(QuantumError::DimensionMismatch {
            expected: h.dimension(),
            got: psi.amplitudes().len(),
        });
    }
    Ok(())
}

/// Integrates the Schrödinger equation from `psi0` over `[0, T]`, calling
/// `observer` at steps `0, stride, 2·stride, …` before `T`.
///
/// The norm is not renormalized. A drift above [`NORM_DRIFT_LIMIT`] aborts
/// with [`QuantumError::NormDrift`].
pub fn evolve<F>(
    psi0: &StateVector,
    h: &impl HamiltonianOp,
    config: &EvolutionConfig,
    mut observer: F,
) -> Result<StateVector>
where
    F: FnMut(&Sample<'_>) -> Result<()>,
{
    check_dimension(psi0, h)?;
    let steps = config.steps()?;
    let dt = config.dt;
    let norm0 = psi0.norm();
    let mut psi = psi0.clone();
    let mut buf = Rk4Buffers::new(h.dimension());
    let check_norm = |psi: &StateVector, t: f64| {
        let drift = (psi.norm() - norm0).abs();
        if drift > NORM_DRIFT_LIMIT || !drift.is_finite() {
            Err(QuantumError::NormDrift { t, drift })
        } else {
            Ok(())
        }
    };

    for step in 0..steps {
        if step % config.stride == 0 {
            let t = step as f64 * dt;
            check_norm(&psi, t)?;
            let covered = config.stride.min(steps - step);
            observer(&Sample {
                step,
                t,
                weight: covered as f64 * dt,
                state: &psi,
            })?;
        }
        buf.step(h, psi.amplitudes_mut(), dt);
    }
    check_norm(&psi, steps as f64 * dt)?;
    Ok(psi)
}
