//! Surface-of-section crossings and momentum plots at a potential minimum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClassicalError, IntegratorConfig, Result, Trajectory};
use crate::model::{ModelParams, PhaseState, PotentialMinimum};
use crate::rng::NormalStream;

/// Initial momenta are `yᵢ(0) = scale · rᵢ` with standard-normal `rᵢ` and `x(0) = 0`.
pub const DEFAULT_INITIAL_SCALE: f64 = 1e-6;

fn near_origin_start(seed: u64, member: usize, scale: f64) -> PhaseState {
    let mut rng = NormalStream::for_member(seed, member as u64);
    let r1 = rng.normal();
    let r2 = rng.normal();
    PhaseState::new(0.0, 0.0, scale * r1, scale * r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SosConfig {
    pub integrator: IntegratorConfig,
    pub iterations: usize,
    pub seed: u64,
    pub initial_scale: f64,
    /// Linearly interpolate to the exact `y₂ = 0` crossing instead of
    /// recording the first sample past it.
    pub interpolate: bool,
}

impl Default for SosConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            iterations: 200,
            seed: 1,
            initial_scale: DEFAULT_INITIAL_SCALE,
            interpolate: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub member: usize,
    pub t: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Records `(x₁, y₁)` whenever `y₂(t)·y₂(t−Δt) < 0`, over `iterations`
/// independent trajectories started near the origin.
pub fn sos_crossings(params: &ModelParams, config: &SosConfig) -> Result<Vec<Crossing>> {
    params.validate()?;
    let steps = config.integrator.steps()?;
    let dt = config.integrator.dt;
    let per_member: Vec<Vec<Crossing>> = (0..config.iterations)
        .into_par_iter()
        .map(|member| {
            let start = near_origin_start(config.seed, member, config.initial_scale);
            let mut traj = Trajectory::new(params, start, dt);
            let mut prev = start;
            let mut out = Vec::new();
            for _ in 0..steps {
                let cur = traj.advance()?;
                if cur.y2 * prev.y2 < 0.0 {
                    let (t, x1, y1) = if config.interpolate {
                        let f = prev.y2 / (prev.y2 - cur.y2);
                        (
                            traj.time() - (1.0 - f) * dt,
                            prev.x1 + f * (cur.x1 - prev.x1),
                            prev.y1 + f * (cur.y1 - prev.y1),
                        )
                    } else {
                        (traj.time(), cur.x1, cur.y1)
                    };
                    out.push(Crossing { member, t, x1, y1 });
                }
                prev = cur;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_member.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpmpConfig {
    pub integrator: IntegratorConfig,
    pub iterations: usize,
    pub seed: u64,
    pub initial_scale: f64,
    /// Radius of the position-space ball around the minimum.
    pub tol: f64,
    /// Record every sample inside the ball rather than one per entry.
    pub every_sample: bool,
}

impl Default for MpmpConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            iterations: 1000,
            seed: 1,
            initial_scale: DEFAULT_INITIAL_SCALE,
            tol: 1e-3,
            every_sample: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpmpPoint {
    pub member: usize,
    pub t: f64,
    pub y1: f64,
    pub y2: f64,
}

/// Records `(y₁, y₂)` while the position `(x₁, x₂)` lies within `tol` of the
/// potential minimum. By default only the first sample of each pass through
/// the ball is kept.
pub fn mpmp_points(params: &ModelParams, config: &MpmpConfig, minimum: &PotentialMinimum) -> Result<Vec<MpmpPoint>> {
    params.validate()?;
    if !(config.tol >= 0.0) {
        return Err(ClassicalError::InvalidConfig(format!(
            "tol must be non-negative, got {}",
            config.tol
        )));
    }
    let steps = config.integrator.steps()?;
    let dt = config.integrator.dt;
    let tol2 = config.tol * config.tol;
    let inside = |s: &PhaseState| {
        let d1 = s.x1 - minimum.x1;
        let d2 = s.x2 - minimum.x2;
        d1 * d1 + d2 * d2 < tol2
    };
    let per_member: Vec<Vec<MpmpPoint>> = (0..config.iterations)
        .into_par_iter()
        .map(|member| {
            let start = near_origin_start(config.seed, member, config.initial_scale);
            let mut traj = Trajectory::new(params, start, dt);
            let mut was_inside = inside(&start);
            let mut out = Vec::new();
            for _ in 0..steps {
                let cur = traj.advance()?;
                let now_inside = inside(&cur);
                if now_inside && (config.every_sample || !was_inside) {
                    out.push(MpmpPoint {
                        member,
                        t: traj.time(),
                        y1: cur.y1,
                        y2: cur.y2,
                    });
                }
                was_inside = now_inside;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_member.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{find_potential_minimum, mode_energy, Quadrant};

    fn short(iterations: usize) -> SosConfig {
        SosConfig {
            iterations,
            ..SosConfig::default()
        }
    }

    #[test]
    fn zero_iterations_yield_nothing() {
        let p = ModelParams::with_coupling(1.0);
        assert!(sos_crossings(&p, &short(0)).unwrap().is_empty());
        let m = find_potential_minimum(&p, Quadrant::FIRST).unwrap();
        let cfg = MpmpConfig {
            iterations: 0,
            ..MpmpConfig::default()
        };
        assert!(mpmp_points(&p, &cfg, &m).unwrap().is_empty());
    }

    #[test]
    fn zero_tolerance_yields_nothing() {
        let p = ModelParams::with_coupling(1.0);
        let m = find_potential_minimum(&p, Quadrant::FIRST).unwrap();
        let cfg = MpmpConfig {
            iterations: 2,
            tol: 0.0,
            ..MpmpConfig::default()
        };
        assert!(mpmp_points(&p, &cfg, &m).unwrap().is_empty());
    }

    #[test]
    fn decoupled_crossings_stay_on_single_mode_level_curves() {
        let p = ModelParams::with_coupling(0.0);
        let pts = sos_crossings(&p, &short(4)).unwrap();
        assert!(!pts.is_empty());
        for member in 0..4 {
            let h: Vec<f64> = pts
                .iter()
                .filter(|c| c.member == member)
                .map(|c| mode_energy(&PhaseState::new(c.x1, 0.0, c.y1, 0.0), &p, 0))
                .collect();
            let spread = h.iter().cloned().fold(f64::MIN, f64::max) - h.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 1e-3, "member {member}: spread {spread}");
        }
    }

    #[test]
    fn crossings_are_deterministic() {
        let p = ModelParams::with_coupling(0.3);
        let cfg = SosConfig {
            iterations: 2,
            integrator: IntegratorConfig::new(1e-3, 10.0),
            ..SosConfig::default()
        };
        assert_eq!(sos_crossings(&p, &cfg).unwrap(), sos_crossings(&p, &cfg).unwrap());
    }

    #[test]
    fn interpolated_crossings_lie_between_samples() {
        let p = ModelParams::with_coupling(1.0);
        let base = SosConfig {
            iterations: 1,
            integrator: IntegratorConfig::new(1e-3, 20.0),
            ..SosConfig::default()
        };
        let raw = sos_crossings(&p, &base).unwrap();
        let interp = sos_crossings(
            &p,
            &SosConfig {
                interpolate: true,
                ..base
            },
        )
        .unwrap();
        assert_eq!(raw.len(), interp.len());
        for (a, b) in raw.iter().zip(&interp) {
            assert!(b.t <= a.t && b.t > a.t - 1e-3 - 1e-12);
            assert!((a.x1 - b.x1).abs() < 0.05 && (a.y1 - b.y1).abs() < 0.05);
        }
    }

    #[test]
    fn dedup_keeps_one_point_per_entry() {
        let p = ModelParams::with_coupling(1.0);
        let m = find_potential_minimum(&p, Quadrant::FIRST).unwrap();
        let base = MpmpConfig {
            iterations: 20,
            tol: 0.05,
            ..MpmpConfig::default()
        };
        let dedup = mpmp_points(&p, &base, &m).unwrap();
        let all = mpmp_points(
            &p,
            &MpmpConfig {
                every_sample: true,
                ..base
            },
            &m,
        )
        .unwrap();
        assert!(!dedup.is_empty());
        assert!(all.len() > dedup.len());
        // every deduplicated point is also a recorded sample
        for d in &dedup {
            assert!(all.iter().any(|a| a.member == d.member && a.t == d.t));
        }
    }
}
