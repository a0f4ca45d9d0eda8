use serde::{Deserialize, Serialize};
use std::io::{self, Write};

use super::quasi::QuasiKind;
use super::state::InitialState;
use super::{QuantumError, Result};
use crate::model::ModelParams;

/// Uniform axis with `count` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Self { min, max, count };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.count == 0 {
            return Err(QuantumError::InvalidConfig(format!("invalid axis {self:?}")));
        }
        if self.count > 1 && self.max <= self.min {
            return Err(QuantumError::InvalidConfig(format!(
                "axis max {} must exceed min {}",
                self.max, self.min
            )));
        }
        Ok(())
    }

    /// Spacing between neighbouring points (zero for a single point).
    pub fn step(&self) -> f64 {
        if self.count > 1 {
            (self.max - self.min) / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x: Axis,
    pub y: Axis,
}

impl GridSpec {
    pub fn square(min: f64, max: f64, count: usize) -> Self {
        let axis = Axis { min, max, count };
        Self { x: axis, y: axis }
    }

    /// 81×81 over `[−3, 3]²` in `(x₁, y₁)`.
    pub fn sos_default() -> Self {
        Self::square(-3.0, 3.0, 81)
    }

    /// 81×81 over `[−2.5, 2.5]²` in `(y₁, y₂)`.
    pub fn mpmp_default() -> Self {
        Self::square(-2.5, 2.5, 81)
    }

    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()
    }

    pub fn cells(&self) -> usize {
        self.x.count * self.y.count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    QuantumSos,
    QuantumMpmp,
}

/// Provenance stored next to a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub diagnostic: Diagnostic,
    pub kind: QuasiKind,
    pub params: ModelParams,
    pub n_max: usize,
    pub dt: f64,
    pub t_final: f64,
    pub stride: usize,
    pub initial: InitialState,
    /// `(X₁, X₂)` for the momentum-space maps.
    pub center: Option<[f64; 2]>,
    pub samples: usize,
    pub final_norm: f64,
    pub x_label: String,
    pub y_label: String,
}

/// Accumulated values on a [`GridSpec`], stored x-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    spec: GridSpec,
    values: Vec<f64>,
    pub metadata: GridMetadata,
}

impl Grid2D {
    pub fn new(spec: GridSpec, values: Vec<f64>, metadata: GridMetadata) -> Result<Self> {
        if values.len() != spec.cells() {
            return Err(QuantumError::DimensionMismatch {
                expected: spec.cells(),
                got: values.len(),
            });
        }
        Ok(Self { spec, values, metadata })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.spec.y.count + iy]
    }

    /// Coordinates of the cell at flat index `k`.
    pub fn coordinates(&self, k: usize) -> (f64, f64) {
        let ny = self.spec.y.count;
        (self.spec.x.point(k / ny), self.spec.y.point(k % ny))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Riemann sum `Σ value · Δx · Δy`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.x.step() * self.spec.y.step()
    }

    /// Highest-valued cells that jointly hold at least `fraction` of the
    /// positive mass, highest first.
    pub fn top_mass_cells(&self, fraction: f64) -> Vec<(f64, f64)> {
        let mut order: Vec<usize> = (0..self.values.len()).filter(|&k| self.values[k] > 0.0).collect();
        order.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]));
        let total: f64 = order.iter().map(|&k| self.values[k]).sum();
        let mut acc = 0.0;
        let mut out = Vec::new();
        for k in order {
            if acc >= fraction * total {
                break;
            }
            acc += self.values[k];
            out.push(self.coordinates(k));
        }
        out
    }

    /// CSV with header `x,y,value`, one cell per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{},{},value", self.metadata.x_label, self.metadata.y_label)?;
        for (k, v) in self.values.iter().enumerate() {
            let (x, y) = self.coordinates(k);
            writeln!(w, "{x:.16e},{y:.16e},{v:.16e}")?;
        }
        w.flush()
    }
}
