//! Time-integrated quasi-probability maps.
//!
//! Every map is linear in `ψψ*`, so the time integral is taken on the state
//! side first and the grid is evaluated once at the end:
//!
//! * surface of section: the mode-2 marginal is folded in at every sample,
//!   leaving a `(n_max+1)²` reduced matrix `R = Σ w Ψ A₂ᵀ Ψ†`;
//! * momentum maps: the full `Σ w ψψ†` is kept and contracted with the
//!   mode-1 kernel per `y₁` row, then with the mode-2 kernel per `y₂`.
//!
//! This is the same left-Riemann sum as evaluating the grid at each sample.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::evolve::{evolve, EvolutionConfig};
use super::grid::{Diagnostic, Grid2D, GridMetadata, GridSpec};
use super::quasi::{QuasiKind, IMAGINARY_RESIDUE_LIMIT};
use super::{QuantumError, Result};
use crate::model::{BandedHamiltonian, FockDimension, ModelParams, PotentialMinimum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

struct RunInfo {
    samples: usize,
    final_norm: f64,
}

fn check_inputs(params: &ModelParams, config: &EvolutionConfig, grid: &GridSpec, kinds: &[QuasiKind]) -> Result<()> {
    params.validate()?;
    config.steps()?;
    grid.validate()?;
    if kinds.is_empty() {
        return Err(QuantumError::InvalidConfig(
            "no quasi-probability kind requested".into(),
        ));
    }
    Ok(())
}

fn real_part(v: Complex64, kind: QuasiKind) -> Result<f64> {
    if kind == QuasiKind::Wigner && v.im.abs() > IMAGINARY_RESIDUE_LIMIT * v.re.abs().max(1.0) {
        return Err(QuantumError::ImaginaryResidue { real: v.re, imag: v.im });
    }
    Ok(v.re)
}

/// `tr(A B)` for square matrices of equal size.
fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    // tr(AB) = Σ_ij A[i,j] B[j,i]
    let n = a.nrows();
    let mut s = ZERO;
    for j in 0..n {
        for i in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// `∫₀ᵀ dt ∫ dx₂ F(x₁, x₂, y₁, 0)` on a grid over `(x₁, y₁)`.
pub fn accumulate_quantum_sos(
    params: &ModelParams,
    dim: FockDimension,
    config: &EvolutionConfig,
    grid: &GridSpec,
    kind: QuasiKind,
) -> Result<Grid2D> {
    Ok(quantum_sos_grids(params, dim, config, grid, &[kind])?.remove(0))
}

/// [`accumulate_quantum_sos`] for several kinds sharing one evolution.
pub fn quantum_sos_grids(
    params: &ModelParams,
    dim: FockDimension,
    config: &EvolutionConfig,
    grid: &GridSpec,
    kinds: &[QuasiKind],
) -> Result<Vec<Grid2D>> {
    check_inputs(params, config, grid, kinds)?;
    let n_max = dim.n_max();
    let d = dim.per_mode();
    let h = BandedHamiltonian::new(params, dim);
    let psi0 = config.initial.build(dim);

    let a2t: Vec<DMatrix<Complex64>> = kinds.iter().map(|k| k.x2_marginal_kernel(n_max).transpose()).collect();
    let mut reduced = vec![DMatrix::<Complex64>::zeros(d, d); kinds.len()];
    let mut samples = 0;
    let last = evolve(&psi0, &h, config, |s| {
        let m = s.state.as_matrix();
        let mh = m.adjoint();
        let w = Complex64::new(s.weight, 0.0);
        for (r, a) in reduced.iter_mut().zip(&a2t) {
            *r += (&m * a * &mh) * w;
        }
        samples += 1;
        Ok(())
    })?;
    let info = RunInfo {
        samples,
        final_norm: last.norm(),
    };

    let xs = grid.x.points();
    let ys = grid.y.points();
    kinds
        .iter()
        .zip(&reduced)
        .map(|(&kind, r)| {
            let pref = kind.prefactor();
            let values = (0..grid.cells())
                .into_par_iter()
                .map(|k| {
                    let alpha = Complex64::new(xs[k / ys.len()], ys[k % ys.len()]);
                    let a1 = kind.kernel(alpha, n_max);
                    real_part(trace_product(&a1, r) * pref, kind)
                })
                .collect::<Result<Vec<f64>>>()?;
            let metadata = metadata(
                Diagnostic::QuantumSos,
                kind,
                params,
                dim,
                config,
                None,
                &info,
                "x1",
                "y1",
            );
            Grid2D::new(*grid, values, metadata)
        })
        .collect()
}

/// `∫₀ᵀ dt F(X₁, X₂, y₁, y₂)` on a grid over `(y₁, y₂)` at a potential minimum.
pub fn accumulate_quantum_mpmp(
    params: &ModelParams,
    dim: FockDimension,
    config: &EvolutionConfig,
    minimum: &PotentialMinimum,
    grid: &GridSpec,
    kind: QuasiKind,
) -> Result<Grid2D> {
    Ok(quantum_mpmp_grids(params, dim, config, minimum, grid, &[kind])?.remove(0))
}

/// [`accumulate_quantum_mpmp`] for several kinds sharing one evolution.
pub fn quantum_mpmp_grids(
    params: &ModelParams,
    dim: FockDimension,
    config: &EvolutionConfig,
    minimum: &PotentialMinimum,
    grid: &GridSpec,
    kinds: &[QuasiKind],
) -> Result<Vec<Grid2D>> {
    check_inputs(params, config, grid, kinds)?;
    let n_max = dim.n_max();
    let d = dim.per_mode();
    let h = BandedHamiltonian::new(params, dim);
    let psi0 = config.initial.build(dim);

    // ρ = Σ w ψψ†, lower triangle only until the end
    let total = dim.total();
    let mut rho = DMatrix::<Complex64>::zeros(total, total);
    let mut support = Vec::with_capacity(total);
    let mut samples = 0;
    let last = evolve(&psi0, &h, config, |s| {
        let amps = s.state.amplitudes();
        support.clear();
        support.extend((0..total).filter(|&k| amps[k] != ZERO));
        for (jj, &j) in support.iter().enumerate() {
            let cj = amps[j].conj() * s.weight;
            let mut col = rho.column_mut(j);
            for &i in &support[jj..] {
                col[i] += amps[i] * cj;
            }
        }
        samples += 1;
        Ok(())
    })?;
    for j in 0..total {
        for i in 0..j {
            rho[(i, j)] = rho[(j, i)].conj();
        }
    }
    let info = RunInfo {
        samples,
        final_norm: last.norm(),
    };

    let (x1c, x2c) = (minimum.x1, minimum.x2);
    let y1s = grid.x.points();
    let y2s = grid.y.points();
    kinds
        .iter()
        .map(|&kind| {
            let pref = kind.prefactor();
            let a2: Vec<DMatrix<Complex64>> = y2s
                .iter()
                .map(|&y2| kind.kernel(Complex64::new(x2c, y2), n_max))
                .collect();
            let rows = y1s
                .par_iter()
                .map(|&y1| {
                    let a1 = kind.kernel(Complex64::new(x1c, y1), n_max);
                    // S[n₂,m₂] = Σ A₁[m₁,n₁] ρ[(n₁,n₂),(m₁,m₂)]
                    let mut s = DMatrix::<Complex64>::zeros(d, d);
                    for m1 in 0..d {
                        for n1 in 0..d {
                            let a = a1[(m1, n1)];
                            if a == ZERO {
                                continue;
                            }
                            let block = rho.view((n1 * d, m1 * d), (d, d));
                            s.zip_apply(&block, |acc, b| *acc += a * b);
                        }
                    }
                    a2.iter()
                        .map(|a| real_part(trace_product(a, &s) * pref, kind))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            let metadata = metadata(
                Diagnostic::QuantumMpmp,
                kind,
                params,
                dim,
                config,
                Some([x1c, x2c]),
                &info,
                "y1",
                "y2",
            );
            Grid2D::new(*grid, rows.concat(), metadata)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn metadata(
    diagnostic: Diagnostic,
    kind: QuasiKind,
    params: &ModelParams,
    dim: FockDimension,
    config: &EvolutionConfig,
    center: Option<[f64; 2]>,
    info: &RunInfo,
    x_label: &str,
    y_label: &str,
) -> GridMetadata {
    GridMetadata {
        diagnostic,
        kind,
        params: *params,
        n_max: dim.n_max(),
        dt: config.dt,
        t_final: config.t_final,
        stride: config.stride,
        initial: config.initial,
        center,
        samples: info.samples,
        final_norm: info.final_norm,
        x_label: x_label.into(),
        y_label: y_label.into(),
    }
}
