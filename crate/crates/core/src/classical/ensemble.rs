//! Paired-trajectory experiments: initial-condition sensitivity and the
//! classical OTOC ensemble `C̃ᵢ₁(t) = ⟨((x′ᵢ(t) − xᵢ(t))/δx)²⟩`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClassicalError, IntegratorConfig, Result, Trajectory};
use crate::model::{ModelParams, PhaseState};
use crate::rng::NormalStream;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().cloned().zip(self.values.iter().cloned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    pub integrator: IntegratorConfig,
    /// Offset of `x′₁(0)` from `x₁(0)`.
    pub deviation: f64,
    /// Initial momenta `(y₁, y₂) = radius·(cos θ, sin θ)`.
    pub momentum_radius: f64,
    pub momentum_angle: f64,
    /// Emit one sample every `output_stride` steps.
    pub output_stride: usize,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            deviation: 1e-6,
            momentum_radius: 0.5,
            momentum_angle: 0.65 * std::f64::consts::PI,
            output_stride: 100,
        }
    }
}

impl SensitivityConfig {
    pub fn initial_pair(&self) -> (PhaseState, PhaseState) {
        let y1 = self.momentum_radius * self.momentum_angle.cos();
        let y2 = self.momentum_radius * self.momentum_angle.sin();
        let a = PhaseState::new(0.0, 0.0, y1, y2);
        let b = PhaseState::new(self.deviation, 0.0, y1, y2);
        (a, b)
    }
}

/// Euclidean phase-space distance between two trajectories whose initial
/// conditions differ only in `x₁`.
pub fn sensitivity_distance(params: &ModelParams, config: &SensitivityConfig) -> Result<TimeSeries> {
    params.validate()?;
    if !(config.deviation > 0.0) {
        return Err(ClassicalError::InvalidConfig("deviation must be positive".into()));
    }
    if config.output_stride == 0 {
        return Err(ClassicalError::InvalidConfig("output_stride must be at least 1".into()));
    }
    let steps = config.integrator.steps()?;
    let dt = config.integrator.dt;
    let (a0, b0) = config.initial_pair();
    let mut a = Trajectory::new(params, a0, dt);
    let mut b = Trajectory::new(params, b0, dt);
    let mut out = TimeSeries::default();
    out.times.push(0.0);
    out.values.push(config.deviation);
    for k in 1..=steps {
        let sa = a.advance()?;
        let sb = b.advance()?;
        if k % config.output_stride == 0 {
            out.times.push(a.time());
            out.values.push(sa.distance(&sb));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OtocEnsembleConfig {
    pub dt: f64,
    pub spread_x: f64,
    pub spread_y: f64,
    pub probe_offset: f64,
    pub iterations: usize,
    pub seed: u64,
    pub center: PhaseState,
}

impl Default for OtocEnsembleConfig {
    fn default() -> Self {
        let angle = 0.65 * std::f64::consts::PI;
        Self {
            dt: 1e-4,
            spread_x: 0.5,
            spread_y: 0.5,
            probe_offset: 0.5,
            iterations: 1000,
            seed: 1,
            center: PhaseState::new(0.0, 0.0, 0.5 * angle.cos(), 0.5 * angle.sin()),
        }
    }
}

impl OtocEnsembleConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(ClassicalError::InvalidConfig("dt must be positive".into()));
        }
        if !(self.spread_x > 0.0 && self.spread_y > 0.0 && self.probe_offset > 0.0) {
            return Err(ClassicalError::InvalidConfig(
                "spreads and probe offset must be positive".into(),
            ));
        }
        if self.iterations == 0 {
            return Err(ClassicalError::InvalidConfig("iterations must be at least 1".into()));
        }
        Ok(())
    }

    /// Initial pair for ensemble member `index`: Gaussian spread around the
    /// center, with the probe trajectory shifted by `δx` in `x₁` only.
    pub fn member_initial_pair(&self, index: usize) -> (PhaseState, PhaseState) {
        let mut rng = NormalStream::for_member(self.seed, index as u64);
        let r: [f64; 4] = std::array::from_fn(|_| rng.normal());
        let base = PhaseState::new(
            self.center.x1 + self.spread_x * r[0],
            self.center.x2 + self.spread_x * r[1],
            self.center.y1 + self.spread_y * r[2],
            self.center.y2 + self.spread_y * r[3],
        );
        let probe = PhaseState {
            x1: base.x1 + self.probe_offset,
            ..base
        };
        (base, probe)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtocSeries {
    /// 1-based mode indices `(i, j)` of `C̃ᵢⱼ`.
    pub i: usize,
    pub j: usize,
    pub series: TimeSeries,
}

/// Classical OTOC `C̃ᵢ₁(t)` for a single mode `i ∈ {1, 2}`.
pub fn classical_otoc(
    params: &ModelParams,
    config: &OtocEnsembleConfig,
    i: usize,
    times: &[f64],
) -> Result<OtocSeries> {
    if !(i == 1 || i == 2) {
        return Err(ClassicalError::InvalidConfig(format!(
            "mode index must be 1 or 2, got {i}"
        )));
    }
    let [c1, c2] = classical_otoc_modes(params, config, times)?;
    Ok(if i == 1 { c1 } else { c2 })
}

/// Both `C̃₁₁` and `C̃₂₁` from one ensemble pass.
pub fn classical_otoc_modes(
    params: &ModelParams,
    config: &OtocEnsembleConfig,
    times: &[f64],
) -> Result<[OtocSeries; 2]> {
    params.validate()?;
    config.validate()?;
    let dt = config.dt;
    let mut sample_steps = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(ClassicalError::InvalidConfig(format!("invalid sample time {t}")));
        }
        let k = (t / dt).round();
        if (k * dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(ClassicalError::InvalidConfig(format!(
                "sample time {t} is not on the dt = {dt} grid"
            )));
        }
        sample_steps.push(k as usize);
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by_key(|&k| sample_steps[k]);
    let last = sample_steps.iter().copied().max().unwrap_or(0);
    let inv = 1.0 / config.probe_offset;

    // per member: squared normalized separations at each requested time
    let members: Vec<Vec<[f64; 2]>> = (0..config.iterations)
        .into_par_iter()
        .map(|member| {
            let (a0, b0) = config.member_initial_pair(member);
            let mut a = Trajectory::new(params, a0, dt);
            let mut b = Trajectory::new(params, b0, dt);
            let mut out = vec![[0.0; 2]; times.len()];
            let mut next = 0;
            let record = |sa: &PhaseState, sb: &PhaseState| {
                let d1 = (sb.x1 - sa.x1) * inv;
                let d2 = (sb.x2 - sa.x2) * inv;
                [d1 * d1, d2 * d2]
            };
            while next < order.len() && sample_steps[order[next]] == 0 {
                out[order[next]] = record(&a0, &b0);
                next += 1;
            }
            for step in 1..=last {
                let sa = a.advance()?;
                let sb = b.advance()?;
                while next < order.len() && sample_steps[order[next]] == step {
                    out[order[next]] = record(&sa, &sb);
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let n = config.iterations as f64;
    let mut sums = vec![[0.0; 2]; times.len()];
    for m in &members {
        for (s, v) in sums.iter_mut().zip(m) {
            s[0] += v[0];
            s[1] += v[1];
        }
    }
    let series = |mode: usize| OtocSeries {
        i: mode + 1,
        j: 1,
        series: TimeSeries {
            times: times.to_vec(),
            values: sums.iter().map(|s| s[mode] / n).collect(),
        },
    };
    Ok([series(0), series(1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensitivity_starts_at_deviation() {
        let p = ModelParams::with_coupling(1.0);
        let cfg = SensitivityConfig {
            integrator: IntegratorConfig::new(1e-4, 1.0),
            ..SensitivityConfig::default()
        };
        let s = sensitivity_distance(&p, &cfg).unwrap();
        assert_eq!(s.times[0], 0.0);
        assert_eq!(s.values[0], 1e-6);
        assert_eq!(s.len(), 101);
        assert!(s.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn otoc_at_zero_time() {
        let p = ModelParams::with_coupling(0.3);
        let cfg = OtocEnsembleConfig {
            iterations: 50,
            ..OtocEnsembleConfig::default()
        };
        let [c1, c2] = classical_otoc_modes(&p, &cfg, &[0.0, 0.1]).unwrap();
        assert_eq!(c1.series.values[0], 1.0);
        assert_eq!(c2.series.values[0], 0.0);
        assert!(c2.series.values[1] > 0.0);
    }

    #[test]
    fn decoupled_second_mode_never_feels_probe() {
        let p = ModelParams::with_coupling(0.0);
        let cfg = OtocEnsembleConfig {
            iterations: 20,
            ..OtocEnsembleConfig::default()
        };
        let times = [0.0, 0.5, 1.0, 2.0, 5.0];
        let c = classical_otoc(&p, &cfg, 2, &times).unwrap();
        assert!(c.series.values.iter().all(|&v| v == 0.0));
        assert_eq!((c.i, c.j), (2, 1));
    }

    #[test]
    fn unsorted_times_map_back_to_request_order() {
        let p = ModelParams::with_coupling(1.0);
        let cfg = OtocEnsembleConfig {
            iterations: 8,
            ..OtocEnsembleConfig::default()
        };
        let a = classical_otoc(&p, &cfg, 1, &[0.0, 0.2, 0.4]).unwrap();
        let b = classical_otoc(&p, &cfg, 1, &[0.4, 0.0, 0.2]).unwrap();
        assert_eq!(a.series.values[0], b.series.values[1]);
        assert_eq!(a.series.values[1], b.series.values[2]);
        assert_eq!(a.series.values[2], b.series.values[0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ModelParams::with_coupling(1.0);
        let cfg = OtocEnsembleConfig::default();
        assert!(classical_otoc(&p, &cfg, 3, &[0.0]).is_err());
        assert!(classical_otoc(&p, &cfg, 1, &[0.00005]).is_err());
        let empty = OtocEnsembleConfig { iterations: 0, ..cfg };
        assert!(classical_otoc(&p, &empty, 1, &[0.0]).is_err());
    }
}
