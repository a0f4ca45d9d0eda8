//! Physical model of two coupled Kerr parametric oscillators.
//!
//! The quantum Hamiltonian is
//!
//! ```text
//! H = Σᵢ ħ[K/2 aᵢ†² aᵢ² − pᵢ/2 (aᵢ² + aᵢ†²) + Δ aᵢ†aᵢ] − ħξ₀(a₁†a₂ + a₂†a₁)
//! ```
//!
//! and its classical counterpart follows from `aᵢ → xᵢ + i yᵢ`. Both live here,
//! together with the classical potential and its minima.
//!
//! Basis states `|n₁, n₂⟩` are flattened row-major: `index = n₁·(n_max+1) + n₂`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("maximum photon number must be at least 2, got {0}")]
    FockTooSmall(usize),
    #[error("potential minimum search did not converge after {iterations} iterations (|grad| = {gradient_norm:e})")]
    MinimumNotConverged { iterations: usize, gradient_norm: f64 },
    #[error("stationary point at ({x1}, {x2}) is not a minimum (Hessian not positive definite)")]
    NotAMinimum { x1: f64, x2: f64 },
}

/// Physical constants of the two-oscillator system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub hbar: f64,
    pub kerr: f64,
    pub p1: f64,
    pub p2: f64,
    pub detuning: f64,
    pub xi0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::with_coupling(0.0)
    }
}

impl ModelParams {
    /// Default parameter set (ħ = K = 1, p₁ = 3, p₂ = π, Δ = 0) with the given coupling.
    pub fn with_coupling(xi0: f64) -> Self {
        Self {
            hbar: 1.0,
            kerr: 1.0,
            p1: 3.0,
            p2: std::f64::consts::PI,
            detuning: 0.0,
            xi0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("hbar", self.hbar),
            ("kerr", self.kerr),
            ("p1", self.p1),
            ("p2", self.p2),
            ("detuning", self.detuning),
            ("xi0", self.xi0),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(ModelError::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.kerr <= 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "Kerr coefficient must be positive, got {}",
                self.kerr
            )));
        }
        if self.hbar <= 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        Ok(())
    }

    /// Pump amplitude of mode `i` (0 or 1).
    #[inline]
    pub fn pump(&self, mode: usize) -> f64 {
        if mode == 0 {
            self.p1
        } else {
            self.p2
        }
    }
}

/// Truncation of the two-mode photon-number basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockDimension {
    n_max: usize,
}

impl FockDimension {
    pub fn new(n_max: usize) -> Result<Self, ModelError> {
        if n_max < 2 {
            return Err(ModelError::FockTooSmall(n_max));
        }
        Ok(Self { n_max })
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn per_mode(&self) -> usize {
        self.n_max + 1
    }

    #[inline]
    pub fn total(&self) -> usize {
        self.per_mode() * self.per_mode()
    }

    #[inline]
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.per_mode() + n2
    }

    #[inline]
    pub fn occupation(&self, index: usize) -> (usize, usize) {
        (index / self.per_mode(), index % self.per_mode())
    }
}

impl Default for FockDimension {
    fn default() -> Self {
        Self { n_max: 30 }
    }
}

/// Dense Hermitian matrix over the flattened two-mode basis.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    dim: FockDimension,
    entries: DMatrix<Complex64>,
    hbar: f64,
}

impl HermitianMatrix {
    /// Wraps an arbitrary square matrix. Hermiticity is not checked here;
    /// consumers that require it (the eigensolver) validate on their own.
    pub fn from_dense(dim: FockDimension, entries: DMatrix<Complex64>) -> Self {
        assert_eq!(entries.nrows(), dim.total());
        assert_eq!(entries.ncols(), dim.total());
        Self {
            dim,
            entries,
            hbar: 1.0,
        }
    }

    /// Sets the ħ used when this matrix generates time evolution.
    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn fock(&self) -> FockDimension {
        self.dim
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// Element `⟨m₁,m₂|H|n₁,n₂⟩`.
    pub fn element(&self, bra: (usize, usize), ket: (usize, usize)) -> Complex64 {
        self.entries[(self.dim.index(bra.0, bra.1), self.dim.index(ket.0, ket.1))]
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Writes `H v` into `out`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        // column-major storage: accumulate column by column
        for (col, vc) in v.iter().enumerate() {
            if *vc == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, h) in out.iter_mut().zip(self.entries.column(col).iter()) {
                *o += h * vc;
            }
        }
    }
}

/// Builds the Hamiltonian matrix in the truncated photon-number basis.
///
/// Every off-diagonal element is written together with its conjugate
/// partner, so the result is Hermitian bit-for-bit.
pub fn build_hamiltonian(params: &ModelParams, dim: FockDimension) -> HermitianMatrix {
    let total = dim.total();
    let mut h = DMatrix::<Complex64>::zeros(total, total);
    let mut set = |row: usize, col: usize, v: f64| {
        h[(row, col)] += Complex64::new(v, 0.0);
        if row != col {
            h[(col, row)] += Complex64::new(v, 0.0);
        }
    };
    for_each_element(params, dim, |row, col, v| set(row, col, v));
    HermitianMatrix::from_dense(dim, h).with_hbar(params.hbar)
}

/// Visits the diagonal and the upper-triangle nonzero elements `(row, col, value)`
/// with `row <= col`. Shared by the dense builder and the banded operator.
pub(crate) fn for_each_element(params: &ModelParams, dim: FockDimension, mut visit: impl FnMut(usize, usize, f64)) {
    let n_max = dim.n_max();
    let hbar = params.hbar;
    for n1 in 0..=n_max {
        for n2 in 0..=n_max {
            let idx = dim.index(n1, n2);
            let kerr = 0.5 * params.kerr * ((n1 * n1.saturating_sub(1)) + (n2 * n2.saturating_sub(1))) as f64;
            let det = params.detuning * (n1 + n2) as f64;
            visit(idx, idx, hbar * (kerr + det));

            // −ħpᵢ/2 ⟨n+2|a†²|n⟩ = −ħpᵢ/2 √((n+1)(n+2))
            if n1 + 2 <= n_max {
                let amp = ((n1 + 1) as f64 * (n1 + 2) as f64).sqrt();
                visit(idx, dim.index(n1 + 2, n2), -0.5 * hbar * params.p1 * amp);
            }
            if n2 + 2 <= n_max {
                let amp = ((n2 + 1) as f64 * (n2 + 2) as f64).sqrt();
                visit(idx, dim.index(n1, n2 + 2), -0.5 * hbar * params.p2 * amp);
            }

            // −ħξ₀ ⟨n₁+1, n₂−1| a₁†a₂ |n₁, n₂⟩ = −ħξ₀ √(n₁+1) √n₂
            if params.xi0 != 0.0 && n1 < n_max && n2 > 0 {
                let amp = ((n1 + 1) as f64).sqrt() * (n2 as f64).sqrt();
                let other = dim.index(n1 + 1, n2 - 1);
                let (r, c) = if idx < other { (idx, other) } else { (other, idx) };
                visit(r, c, -hbar * params.xi0 * amp);
            }
        }
    }
}

/// Matrix-free Hamiltonian with at most seven nonzeros per row.
#[derive(Debug, Clone)]
pub struct BandedHamiltonian {
    dim: FockDimension,
    hbar: f64,
    // CSR layout
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl BandedHamiltonian {
    pub fn new(params: &ModelParams, dim: FockDimension) -> Self {
        let total = dim.total();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(7); total];
        for_each_element(params, dim, |r, c, v| {
            if v == 0.0 {
                return;
            }
            rows[r].push((c, v));
            if r != c {
                rows[c].push((r, v));
            }
        });
        let mut row_start = Vec::with_capacity(total + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                cols.push(c);
                values.push(v);
            }
            row_start.push(cols.len());
        }
        Self {
            dim,
            hbar: params.hbar,
            row_start,
            cols,
            values,
        }
    }

    pub fn fock(&self) -> FockDimension {
        self.dim
    }

    pub fn dimension(&self) -> usize {
        self.dim.total()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (row, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_start[row]..self.row_start[row + 1] {
                acc += v[self.cols[k]] * self.values[k];
            }
            *o = acc;
        }
    }
}

/// A point `(x₁, x₂, y₁, y₂)` of the classical phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl PhaseState {
    pub const ORIGIN: PhaseState = PhaseState {
        x1: 0.0,
        x2: 0.0,
        y1: 0.0,
        y2: 0.0,
    };

    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Self { x1, x2, y1, y2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn x(&self, mode: usize) -> f64 {
        if mode == 0 {
            self.x1
        } else {
            self.x2
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn distance(&self, other: &PhaseState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + s·other`, component-wise.
    #[inline]
    pub fn axpy(&self, s: f64, other: &PhaseState) -> PhaseState {
        PhaseState::new(
            self.x1 + s * other.x1,
            self.x2 + s * other.x2,
            self.y1 + s * other.y1,
            self.y2 + s * other.y2,
        )
    }

    pub fn negated(&self) -> PhaseState {
        PhaseState::new(-self.x1, -self.x2, -self.y1, -self.y2)
    }
}

/// Classical Hamiltonian `H_c(x, y)`.
pub fn classical_energy(state: &PhaseState, params: &ModelParams) -> f64 {
    let mode = |x: f64, y: f64, p: f64| {
        let r2 = x * x + y * y;
        0.25 * params.kerr * r2 * r2 - 0.5 * p * (x * x - y * y) + 0.5 * params.detuning * r2
    };
    mode(state.x1, state.y1, params.p1) + mode(state.x2, state.y2, params.p2)
        - params.xi0 * (state.x1 * state.x2 + state.y1 * state.y2)
}

/// Single-mode energy `K/4 (x²+y²)² − p/2 (x²−y²) + Δ/2 (x²+y²)` of mode `i`.
/// Conserved along the flow when the modes are decoupled.
pub fn mode_energy(state: &PhaseState, params: &ModelParams, mode: usize) -> f64 {
    let (x, y) = if mode == 0 {
        (state.x1, state.y1)
    } else {
        (state.x2, state.y2)
    };
    let r2 = x * x + y * y;
    0.25 * params.kerr * r2 * r2 - 0.5 * params.pump(mode) * (x * x - y * y) + 0.5 * params.detuning * r2
}

/// Hamiltonian vector field: `ẋᵢ = ∂H_c/∂yᵢ`, `ẏᵢ = −∂H_c/∂xᵢ`.
#[inline]
pub fn vector_field(s: &PhaseState, params: &ModelParams) -> PhaseState {
    let k = params.kerr;
    let d = params.detuning;
    let r1 = k * (s.x1 * s.x1 + s.y1 * s.y1);
    let r2 = k * (s.x2 * s.x2 + s.y2 * s.y2);
    PhaseState {
        x1: (r1 + params.p1 + d) * s.y1 - params.xi0 * s.y2,
        x2: (r2 + params.p2 + d) * s.y2 - params.xi0 * s.y1,
        y1: -(r1 - params.p1 + d) * s.x1 + params.xi0 * s.x2,
        y2: -(r2 - params.p2 + d) * s.x2 + params.xi0 * s.x1,
    }
}

/// Classical potential `V_c(x) = Σᵢ (K/4 xᵢ⁴ − (pᵢ−Δ)/2 xᵢ²) − ξ₀x₁x₂`.
///
/// This equals `min_y H_c(x, y)` only while `ξ₀ < min(p₁, p₂)`; the
/// polynomial is returned regardless.
pub fn potential(x1: f64, x2: f64, params: &ModelParams) -> f64 {
    let k = params.kerr;
    0.25 * k * (x1.powi(4) + x2.powi(4))
        - 0.5 * (params.p1 - params.detuning) * x1 * x1
        - 0.5 * (params.p2 - params.detuning) * x2 * x2
        - params.xi0 * x1 * x2
}

pub fn potential_gradient(x1: f64, x2: f64, params: &ModelParams) -> [f64; 2] {
    let k = params.kerr;
    [
        k * x1.powi(3) - (params.p1 - params.detuning) * x1 - params.xi0 * x2,
        k * x2.powi(3) - (params.p2 - params.detuning) * x2 - params.xi0 * x1,
    ]
}

pub fn potential_hessian(x1: f64, x2: f64, params: &ModelParams) -> [[f64; 2]; 2] {
    let k = params.kerr;
    [
        [3.0 * k * x1 * x1 - (params.p1 - params.detuning), -params.xi0],
        [-params.xi0, 3.0 * k * x2 * x2 - (params.p2 - params.detuning)],
    ]
}

/// Sign pair selecting one quadrant of the `(x₁, x₂)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadrant {
    pub sign1: i8,
    pub sign2: i8,
}

impl Quadrant {
    pub const FIRST: Quadrant = Quadrant { sign1: 1, sign2: 1 };

    pub fn new(sign1: i8, sign2: i8) -> Self {
        Self {
            sign1: if sign1 < 0 { -1 } else { 1 },
            sign2: if sign2 < 0 { -1 } else { 1 },
        }
    }
}

impl Default for Quadrant {
    fn default() -> Self {
        Self::FIRST
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialMinimum {
    pub x1: f64,
    pub x2: f64,
    pub quadrant: Quadrant,
}

const MINIMUM_GRADIENT_TOL: f64 = 1e-10;
const MINIMUM_MAX_ITER: usize = 100;

/// Locates the local minimum of `V_c` in the requested quadrant by damped
/// Newton iteration, seeded at the decoupled minimum `±√((pᵢ−Δ)/K)`.
pub fn find_potential_minimum(params: &ModelParams, quadrant: Quadrant) -> Result<PotentialMinimum, ModelError> {
    params.validate()?;
    let seed = |p: f64| ((p - params.detuning).max(0.0) / params.kerr).sqrt().max(1e-3);
    let mut x = [
        f64::from(quadrant.sign1) * seed(params.p1),
        f64::from(quadrant.sign2) * seed(params.p2),
    ];
    let norm = |g: [f64; 2]| g[0].hypot(g[1]);

    let mut g = potential_gradient(x[0], x[1], params);
    for _ in 0..MINIMUM_MAX_ITER {
        if norm(g) <= MINIMUM_GRADIENT_TOL {
            break;
        }
        let h = potential_hessian(x[0], x[1], params);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        // Newton direction when the Hessian is positive definite, otherwise
        // plain descent.
        let dir = if h[0][0] > 0.0 && det > 0.0 {
            [
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
            ]
        } else {
            [-g[0], -g[1]]
        };
        let v0 = potential(x[0], x[1], params);
        let mut step = 1.0;
        let mut next = [x[0] + dir[0], x[1] + dir[1]];
        while potential(next[0], next[1], params) > v0 + 1e-14 * v0.abs().max(1.0) && step > 1e-8 {
            step *= 0.5;
            next = [x[0] + step * dir[0], x[1] + step * dir[1]];
        }
        x = next;
        g = potential_gradient(x[0], x[1], params);
    }

    if norm(g) > MINIMUM_GRADIENT_TOL {
        return Err(ModelError::MinimumNotConverged {
            iterations: MINIMUM_MAX_ITER,
            gradient_norm: norm(g),
        });
    }
    let h = potential_hessian(x[0], x[1], params);
    if !(h[0][0] > 0.0 && h[0][0] * h[1][1] - h[0][1] * h[1][0] > 0.0) {
        return Err(ModelError::NotAMinimum { x1: x[0], x2: x[1] });
    }
    Ok(PotentialMinimum {
        x1: x[0],
        x2: x[1],
        quadrant,
    })
}
