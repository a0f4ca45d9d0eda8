//! Classical dynamics: fixed-step RK4 integration of the mean-field equations
//! and the trajectory-based diagnostics built on it.

mod ensemble;
mod sections;

pub use ensemble::{
    classical_otoc, classical_otoc_modes, sensitivity_distance, OtocEnsembleConfig, OtocSeries, SensitivityConfig,
    TimeSeries,
};
pub use sections::{mpmp_points, sos_crossings, Crossing, MpmpConfig, MpmpPoint, SosConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{vector_field, ModelError, ModelParams, PhaseState};

/// Any coordinate beyond this magnitude aborts the trajectory.
pub const BLOWUP_LIMIT: f64 = 1e3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("integrator blow-up at t = {t}: {state:?}")]
    BlowUp { t: f64, state: PhaseState },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T, E = ClassicalError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_final: 20.0,
        }
    }
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self { dt, t_final }
    }

    /// Number of steps `T/dt`, which must be an integer within rounding.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ClassicalError::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(ClassicalError::InvalidConfig(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        let n = (self.t_final / self.dt).round();
        if (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(ClassicalError::InvalidConfig(format!(
                "t_final = {} is not a whole number of steps of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// One classical fourth-order Runge–Kutta step. Negative `dt` integrates
/// backwards in time.
pub fn step_rk4(state: &PhaseState, params: &ModelParams, dt: f64) -> Result<PhaseState> {
    let next = rk4_unchecked(state, params, dt);
    if !next.is_finite() || next.max_abs() > BLOWUP_LIMIT {
        return Err(ClassicalError::BlowUp {
            t: f64::NAN,
            state: next,
        });
    }
    Ok(next)
}

#[inline]
fn rk4_unchecked(s: &PhaseState, params: &ModelParams, dt: f64) -> PhaseState {
    let k1 = vector_field(s, params);
    let k2 = vector_field(&s.axpy(0.5 * dt, &k1), params);
    let k3 = vector_field(&s.axpy(0.5 * dt, &k2), params);
    let k4 = vector_field(&s.axpy(dt, &k3), params);
    PhaseState {
        x1: s.x1 + dt / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
        x2: s.x2 + dt / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
        y1: s.y1 + dt / 6.0 * (k1.y1 + 2.0 * k2.y1 + 2.0 * k3.y1 + k4.y1),
        y2: s.y2 + dt / 6.0 * (k1.y2 + 2.0 * k2.y2 + 2.0 * k3.y2 + k4.y2),
    }
}

/// Streaming RK4 trajectory. Timestamps advance by exactly `step · dt`.
#[derive(Debug, Clone)]
pub struct Trajectory<'a> {
    params: &'a ModelParams,
    dt: f64,
    step: usize,
    state: PhaseState,
}

impl<'a> Trajectory<'a> {
    pub fn new(params: &'a ModelParams, initial: PhaseState, dt: f64) -> Self {
        Self {
            params,
            dt,
            step: 0,
            state: initial,
        }
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn state(&self) -> &PhaseState {
        &self.state
    }

    /// Advances one step and returns the new state.
    pub fn advance(&mut self) -> Result<PhaseState> {
        let next = rk4_unchecked(&self.state, self.params, self.dt);
        self.step += 1;
        if !next.is_finite() || next.max_abs() > BLOWUP_LIMIT {
            return Err(ClassicalError::BlowUp {
                t: self.time(),
                state: next,
            });
        }
        self.state = next;
        Ok(next)
    }
}

impl Iterator for Trajectory<'_> {
    type Item = Result<(f64, PhaseState)>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.advance().map(|s| (self.time(), s)))
    }
}

/// Integrates `steps` RK4 steps and returns the final state.
pub fn integrate(params: &ModelParams, initial: PhaseState, dt: f64, steps: usize) -> Result<PhaseState> {
    let mut traj = Trajectory::new(params, initial, dt);
    for _ in 0..steps {
        traj.advance()?;
    }
    Ok(*traj.state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::classical_energy;

    #[test]
    fn origin_is_fixed() {
        for xi in [0.0, 0.3, 1.0] {
            let p = ModelParams::with_coupling(xi);
            assert_eq!(step_rk4(&PhaseState::ORIGIN, &p, 1e-4).unwrap(), PhaseState::ORIGIN);
        }
    }

    #[test]
    fn single_mode_minimum_is_fixed() {
        let p = ModelParams::with_coupling(0.0);
        let s = PhaseState::new(3f64.sqrt(), 0.0, 0.0, 0.0);
        let next = step_rk4(&s, &p, 1e-4).unwrap();
        assert!((next.x1 - s.x1).abs() < 1e-15);
        assert!(next.y1.abs() < 1e-15 && next.x2 == 0.0 && next.y2 == 0.0);
    }

    #[test]
    fn short_run_energy_drift() {
        let p = ModelParams::with_coupling(1.0);
        let s0 = PhaseState::new(0.1, 0.1, 0.0, 0.0);
        let e0 = classical_energy(&s0, &p);
        let coarse = integrate(&p, s0, 1e-4, 10).unwrap();
        let fine = integrate(&p, s0, 5e-5, 20).unwrap();
        assert!((classical_energy(&coarse, &p) - e0).abs() <= 1e-10);
        assert!((classical_energy(&fine, &p) - e0).abs() <= 1e-10);
        // Richardson: the endpoints agree far below the drift bound
        assert!(coarse.distance(&fine) < 1e-12);
    }

    #[test]
    fn blowup_is_reported() {
        let p = ModelParams::with_coupling(0.0);
        let s = PhaseState::new(20.0, 0.0, 20.0, 0.0);
        assert!(matches!(integrate(&p, s, 0.1, 100), Err(ClassicalError::BlowUp { .. })));
    }

    #[test]
    fn step_count_validation() {
        assert_eq!(IntegratorConfig::new(1e-4, 20.0).steps().unwrap(), 200_000);
        assert!(IntegratorConfig::new(0.3, 1.0).steps().is_err());
        assert!(IntegratorConfig::new(0.0, 1.0).steps().is_err());
        assert!(IntegratorConfig::new(1e-3, -1.0).steps().is_err());
    }

    #[test]
    fn time_reversal() {
        let p = ModelParams::with_coupling(1.0);
        let s0 = PhaseState::new(0.3, -0.2, 0.4, 0.1);
        let fwd = integrate(&p, s0, 1e-4, 200_000).unwrap();
        let back = integrate(&p, fwd, -1e-4, 200_000).unwrap();
        assert!(back.distance(&s0) < 1e-6, "{}", back.distance(&s0));
    }

    #[test]
    fn fourth_order_convergence() {
        let p = ModelParams::with_coupling(0.3);
        let s0 = PhaseState::new(0.5, 0.2, -0.3, 0.4);
        let t = 2.0;
        let base = 0.01;
        let reference = integrate(&p, s0, base / 8.0, (t / (base / 8.0)).round() as usize).unwrap();
        let e1 = integrate(&p, s0, base, (t / base).round() as usize)
            .unwrap()
            .distance(&reference);
        let e2 = integrate(&p, s0, base / 2.0, (t / (base / 2.0)).round() as usize)
            .unwrap()
            .distance(&reference);
        // relative to the dt/8 reference the ideal ratio is (1 − 8⁻⁴)/(2⁻⁴ − 8⁻⁴) ≈ 16.9
        let ratio = e1 / e2;
        assert!(ratio > 8.0 && ratio < 32.0, "ratio {ratio}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]
            #[test]
            fn energy_is_conserved(
                x1 in -1.0f64..1.0, x2 in -1.0f64..1.0,
                y1 in -1.0f64..1.0, y2 in -1.0f64..1.0,
                xi in prop::sample::select(vec![0.0, 0.3, 1.0]),
            ) {
                let p = ModelParams::with_coupling(xi);
                let s0 = PhaseState::new(x1, x2, y1, y2);
                let e0 = classical_energy(&s0, &p);
                let mut traj = Trajectory::new(&p, s0, 1e-4);
                let mut worst = 0.0_f64;
                for k in 0..200_000 {
                    let s = traj.advance().unwrap();
                    if k % 1000 == 0 {
                        worst = worst.max((classical_energy(&s, &p) - e0).abs());
                    }
                }
                prop_assert!(worst <= 1e-8 * e0.abs().max(1.0), "drift {worst}");
            }

            #[test]
            fn flow_commutes_with_inversion(
                x1 in -1.5f64..1.5, x2 in -1.5f64..1.5,
                y1 in -1.5f64..1.5, y2 in -1.5f64..1.5,
                xi in 0.0f64..1.0,
            ) {
                let p = ModelParams::with_coupling(xi);
                let s0 = PhaseState::new(x1, x2, y1, y2);
                let a = integrate(&p, s0, 1e-3, 2000).unwrap();
                let b = integrate(&p, s0.negated(), 1e-3, 2000).unwrap();
                prop_assert!(a.distance(&b.negated()) <= 1e-12 * a.max_abs().max(1.0));
            }
        }
    }
}
