//! Experiment configuration: one TOML document covering every subcommand,
//! assembled from layered overlays before being deserialized.

use std::f64::consts::PI;

use kpo_core::classical::{IntegratorConfig, MpmpConfig, OtocEnsembleConfig, SensitivityConfig, SosConfig};
use kpo_core::model::{FockDimension, ModelParams, PhaseState, Quadrant};
use kpo_core::quantum::{EvolutionConfig, GridSpec, InitialState, QuasiKind};
use kpo_core::spectral::SpacingSelection;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    /// Shared by every classical trajectory diagnostic.
    pub classical: IntegratorConfig,
    pub quantum: QuantumBlock,
    pub sos: SosBlock,
    pub mpmp: MpmpBlock,
    pub sensitivity: SensitivityBlock,
    pub otoc: OtocBlock,
    pub quasi: QuasiBlock,
    pub spectrum: SpectrumBlock,
    pub potential: PotentialBlock,
    pub output: OutputBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            classical: IntegratorConfig::default(),
            quantum: QuantumBlock::default(),
            sos: SosBlock::default(),
            mpmp: MpmpBlock::default(),
            sensitivity: SensitivityBlock::default(),
            otoc: OtocBlock::default(),
            quasi: QuasiBlock::default(),
            spectrum: SpectrumBlock::default(),
            potential: PotentialBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumBlock {
    pub n_max: usize,
    pub dt: f64,
    pub t_final: f64,
    pub stride: usize,
    pub initial: InitialState,
}

impl Default for QuantumBlock {
    fn default() -> Self {
        let e = EvolutionConfig::default();
        Self {
            n_max: 30,
            dt: e.dt,
            t_final: e.t_final,
            stride: e.stride,
            initial: e.initial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SosBlock {
    pub iterations: usize,
    pub seed: u64,
    pub initial_scale: f64,
    pub interpolate: bool,
}

impl Default for SosBlock {
    fn default() -> Self {
        let s = SosConfig::default();
        Self {
            iterations: s.iterations,
            seed: s.seed,
            initial_scale: s.initial_scale,
            interpolate: s.interpolate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpmpBlock {
    pub iterations: usize,
    pub seed: u64,
    pub initial_scale: f64,
    pub tol: f64,
    pub every_sample: bool,
    /// Signs of the quadrant holding the reference minimum.
    pub quadrant: [i8; 2],
}

impl Default for MpmpBlock {
    fn default() -> Self {
        let m = MpmpConfig::default();
        Self {
            iterations: m.iterations,
            seed: m.seed,
            initial_scale: m.initial_scale,
            tol: m.tol,
            every_sample: m.every_sample,
            quadrant: [1, 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityBlock {
    pub deviation: f64,
    pub momentum_radius: f64,
    pub momentum_angle: f64,
    pub output_stride: usize,
}

impl Default for SensitivityBlock {
    fn default() -> Self {
        let s = SensitivityConfig::default();
        Self {
            deviation: s.deviation,
            momentum_radius: s.momentum_radius,
            momentum_angle: s.momentum_angle,
            output_stride: s.output_stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtocBlock {
    pub t_final: f64,
    pub sample_step: f64,
    /// Initial state `|i r cos θ⟩|i r sin θ⟩`, and the classical ensemble center.
    pub radius: f64,
    pub angle: f64,
    /// Mode indices `i` of `C_{i,1}` to emit.
    pub modes: Vec<usize>,
    /// Emit `C_{2,1}` even when the oscillators are decoupled.
    pub zero_coupling_c21: bool,
    pub check_reality: bool,
    /// Also run the classical ensemble counterpart.
    pub with_classical: bool,
    pub ensemble: EnsembleBlock,
}

impl Default for OtocBlock {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            sample_step: 0.05,
            radius: 0.5,
            angle: 0.65 * PI,
            modes: vec![1, 2],
            zero_coupling_c21: false,
            check_reality: true,
            with_classical: false,
            ensemble: EnsembleBlock::default(),
        }
    }
}

impl OtocBlock {
    /// Sample times `0, h, 2h, …` up to `t_final` inclusive.
    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_final / self.sample_step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.sample_step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleBlock {
    pub spread_x: f64,
    pub spread_y: f64,
    pub probe_offset: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for EnsembleBlock {
    fn default() -> Self {
        let e = OtocEnsembleConfig::default();
        Self {
            spread_x: e.spread_x,
            spread_y: e.spread_y,
            probe_offset: e.probe_offset,
            iterations: e.iterations,
            seed: e.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiBlock {
    pub kinds: Vec<QuasiKind>,
    pub sos_grid: GridSpec,
    pub mpmp_grid: GridSpec,
}

impl Default for QuasiBlock {
    fn default() -> Self {
        Self {
            kinds: vec![QuasiKind::Husimi, QuasiKind::Wigner],
            sos_grid: GridSpec::sos_default(),
            mpmp_grid: GridSpec::mpmp_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub count: usize,
    pub selection: SpacingSelection,
}

impl Default for SpectrumBlock {
    fn default() -> Self {
        Self {
            count: 50,
            selection: SpacingSelection::Lowest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub grid: GridSpec,
}

impl Default for PotentialBlock {
    fn default() -> Self {
        Self {
            grid: GridSpec::square(-3.0, 3.0, 121),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: String,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: "kpo-output".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn defaults_table() -> Table {
        Table::try_from(Self::default()).expect("default config serializes")
    }

    pub fn from_table(table: Table) -> Result<Self, CliError> {
        let config: Self = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn fock(&self) -> Result<FockDimension, CliError> {
        FockDimension::new(self.quantum.n_max).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            dt: self.quantum.dt,
            t_final: self.quantum.t_final,
            stride: self.quantum.stride,
            initial: self.quantum.initial,
        }
    }

    pub fn sos_config(&self) -> SosConfig {
        SosConfig {
            integrator: self.classical,
            iterations: self.sos.iterations,
            seed: self.sos.seed,
            initial_scale: self.sos.initial_scale,
            interpolate: self.sos.interpolate,
        }
    }

    pub fn mpmp_config(&self) -> MpmpConfig {
        MpmpConfig {
            integrator: self.classical,
            iterations: self.mpmp.iterations,
            seed: self.mpmp.seed,
            initial_scale: self.mpmp.initial_scale,
            tol: self.mpmp.tol,
            every_sample: self.mpmp.every_sample,
        }
    }

    pub fn quadrant(&self) -> Quadrant {
        Quadrant::new(self.mpmp.quadrant[0], self.mpmp.quadrant[1])
    }

    pub fn sensitivity_config(&self) -> SensitivityConfig {
        SensitivityConfig {
            integrator: self.classical,
            deviation: self.sensitivity.deviation,
            momentum_radius: self.sensitivity.momentum_radius,
            momentum_angle: self.sensitivity.momentum_angle,
            output_stride: self.sensitivity.output_stride,
        }
    }

    pub fn ensemble_config(&self) -> OtocEnsembleConfig {
        let o = &self.otoc;
        OtocEnsembleConfig {
            dt: self.classical.dt,
            spread_x: o.ensemble.spread_x,
            spread_y: o.ensemble.spread_y,
            probe_offset: o.ensemble.probe_offset,
            iterations: o.ensemble.iterations,
            seed: o.ensemble.seed,
            center: PhaseState::new(0.0, 0.0, o.radius * o.angle.cos(), o.radius * o.angle.sin()),
        }
    }

    /// Cheap checks run before any computation starts. The core routines
    /// re-validate their own inputs.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.model.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.classical.steps().map_err(|e| CliError::Config(e.to_string()))?;
        self.fock()?;
        self.evolution().steps().map_err(|e| CliError::Config(e.to_string()))?;
        for grid in [&self.quasi.sos_grid, &self.quasi.mpmp_grid, &self.potential.grid] {
            grid.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if self.quasi.kinds.is_empty() {
            return bad("quasi.kinds must name at least one distribution".into());
        }
        if !(self.mpmp.tol >= 0.0) {
            return bad(format!("mpmp.tol must be non-negative, got {}", self.mpmp.tol));
        }
        if self.sensitivity.output_stride == 0 {
            return bad("sensitivity.output_stride must be at least 1".into());
        }
        let o = &self.otoc;
        if !(o.sample_step > 0.0 && o.t_final >= 0.0 && o.t_final.is_finite()) {
            return bad("otoc.sample_step must be positive and otoc.t_final non-negative".into());
        }
        if o.modes.is_empty() || o.modes.iter().any(|&m| m != 1 && m != 2) {
            return bad(format!(
                "otoc.modes must be a non-empty subset of [1, 2], got {:?}",
                o.modes
            ));
        }
        if o.ensemble.iterations == 0 {
            return bad("otoc.ensemble.iterations must be at least 1".into());
        }
        if self.spectrum.count == 0 {
            return bad("spectrum.count must be at least 1".into());
        }
        if self.output.dir.is_empty() {
            return bad("output.dir must not be empty".into());
        }
        Ok(())
    }
}

/// Recursively overlays `top` onto `base`; tables merge, everything else replaces.
pub fn merge(base: &mut Table, top: Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parses `a.b.c=value` into a nested single-key table. The value is read
/// as a TOML literal, falling back to a bare string.
pub fn parse_assignment(spec: &str) -> Result<Table, CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got '{spec}'")))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("malformed key path '{path}'")));
    }
    let raw = raw.trim();
    let value = match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key present"),
        Err(_) => Value::String(raw.to_string()),
    };
    let mut nested = value;
    for key in keys.iter().rev() {
        let mut t = Table::new();
        t.insert((*key).to_string(), nested);
        nested = Value::Table(t);
    }
    match nested {
        Value::Table(t) => Ok(t),
        _ => unreachable!("at least one key"),
    }
}

pub fn parse_document(text: &str, origin: &str) -> Result<Table, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {}", e.message())))
}

/// Full-size ensembles, applied by `--paper-scale`.
pub fn paper_scale_overlay() -> Table {
    parse_document(
        "[sos]\niterations = 200\n[mpmp]\niterations = 100000\ntol = 1e-3\n[otoc.ensemble]\niterations = 10000\n",
        "paper-scale overlay",
    )
    .expect("static overlay parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_table(parse_document(&c.to_toml(), "echo").unwrap()).unwrap();
        assert_eq!(back, c);
        back.validate().unwrap();
    }

    #[test]
    fn assignments_nest_and_merge() {
        let mut t = ExperimentConfig::defaults_table();
        merge(&mut t, parse_assignment("model.xi0 = 1").unwrap());
        merge(&mut t, parse_assignment("quasi.kinds=[\"wigner\"]").unwrap());
        merge(&mut t, parse_assignment("output.dir=some/where").unwrap());
        let c = ExperimentConfig::from_table(t).unwrap();
        assert_eq!(c.model.xi0, 1.0);
        assert_eq!(c.model.p1, 3.0);
        assert_eq!(c.quasi.kinds, vec![QuasiKind::Wigner]);
        assert_eq!(c.output.dir, "some/where");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut t = ExperimentConfig::defaults_table();
        merge(&mut t, parse_assignment("model.coupling=1").unwrap());
        assert!(matches!(ExperimentConfig::from_table(t), Err(CliError::Config(_))));
        assert!(parse_assignment("novalue").is_err());
        assert!(parse_assignment("a..b=1").is_err());
    }

    #[test]
    fn otoc_times_include_the_endpoint() {
        let o = OtocBlock {
            t_final: 1.0,
            sample_step: 0.1,
            ..OtocBlock::default()
        };
        let t = o.times();
        assert_eq!(t.len(), 11);
        assert!((t[10] - 1.0).abs() < 1e-12);
    }
}
