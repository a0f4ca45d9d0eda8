//! Level-spacing statistics and the cumulative Brody fit
//! `N(Δ) ≈ A(1 − e^{−βΔ^{ω+1}})`.

use serde::{Deserialize, Serialize};

use super::simplex::{minimize, SimplexOptions};
use super::{Result, SpectralError};
use crate::rng::NormalStream;

pub const MIN_FIT_SPACINGS: usize = 10;

/// Which spacings feed the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingSelection {
    /// Consecutive differences among the `count + 1` lowest levels.
    #[default]
    Lowest,
    /// The `count` smallest consecutive differences of the whole list.
    SmallestValues,
}

fn check_sorted(energies: &[f64]) -> Result<()> {
    if energies.iter().any(|e| !e.is_finite()) || energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(SpectralError::InvalidConfig(
            "energies must be finite and ascending".into(),
        ));
    }
    Ok(())
}

/// `E_{k+1} − E_k` for `k < count`.
pub fn level_spacings(energies: &[f64], count: usize) -> Result<Vec<f64>> {
    check_sorted(energies)?;
    if count + 1 > energies.len() {
        return Err(SpectralError::InsufficientLevels {
            needed: count + 1,
            available: energies.len(),
        });
    }
    Ok(energies[..=count].windows(2).map(|w| w[1] - w[0]).collect())
}

/// The `count` smallest consecutive spacings, ascending.
pub fn smallest_spacings(energies: &[f64], count: usize) -> Result<Vec<f64>> {
    check_sorted(energies)?;
    if count + 1 > energies.len() {
        return Err(SpectralError::InsufficientLevels {
            needed: count + 1,
            available: energies.len(),
        });
    }
    let mut all: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    Ok(all)
}

pub fn select_spacings(energies: &[f64], count: usize, selection: SpacingSelection) -> Result<Vec<f64>> {
    match selection {
        SpacingSelection::Lowest => level_spacings(energies, count),
        SpacingSelection::SmallestValues => smallest_spacings(energies, count),
    }
}

/// `A(1 − e^{−βΔ^{ω+1}})`.
pub fn brody_cumulative(delta: f64, amplitude: f64, beta: f64, omega: f64) -> f64 {
    amplitude * -(-beta * delta.powf(omega + 1.0)).exp_m1()
}

/// Sorted spacings paired with the number of spacings `≤` each.
pub fn cumulative_counts(spacings: &[f64]) -> Vec<(f64, f64)> {
    let mut s = spacings.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && s[end] == s[k] {
            end += 1;
        }
        out.extend(std::iter::repeat((s[k], end as f64)).take(end - k));
        k = end;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingFit {
    pub spacings: Vec<f64>,
    pub omega: f64,
    pub amplitude: f64,
    pub beta: f64,
    /// Residual sum of squares of the cumulative counts.
    pub rss: f64,
    pub converged: bool,
}

const OMEGA_STARTS: [f64; 3] = [0.0, 0.5, 1.0];

/// Least-squares Brody fit of the cumulative spacing count.
///
/// Parameters are searched as `(ln A, ln β, ln(ω+1))`, which keeps `A, β > 0`
/// and `ω > −1`. The simplex is restarted from `ω ∈ {0, ½, 1}` with
/// `A = n` and `β = ⟨Δ⟩^{−(ω+1)}`, and once more from each optimum.
pub fn brody_fit(spacings: &[f64]) -> Result<SpacingFit> {
    if spacings.len() < MIN_FIT_SPACINGS {
        return Err(SpectralError::TooFewSpacings {
            got: spacings.len(),
            min: MIN_FIT_SPACINGS,
        });
    }
    if spacings.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(SpectralError::InvalidConfig(
            "spacings must be finite and non-negative".into(),
        ));
    }
    let lo = spacings.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = spacings.iter().copied().fold(0.0, f64::max);
    if hi <= 0.0 || hi - lo <= 1e-12 * hi {
        return Err(SpectralError::DegenerateSpacings);
    }

    let data = cumulative_counts(spacings);
    let n = spacings.len() as f64;
    let mean = spacings.iter().sum::<f64>() / n;
    let rss = |theta: &[f64]| -> f64 {
        let (a, b, w) = (theta[0].exp(), theta[1].exp(), theta[2].exp() - 1.0);
        data.iter()
            .map(|&(d, count)| {
                let r = count - brody_cumulative(d, a, b, w);
                r * r
            })
            .sum()
    };

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for omega0 in OMEGA_STARTS {
        let start = [n.ln(), -(omega0 + 1.0) * mean.ln(), (omega0 + 1.0).ln()];
        let first = minimize(rss, &start, SimplexOptions::default());
        let polished = minimize(
            rss,
            &first.x,
            SimplexOptions {
                step: 0.05,
                ..SimplexOptions::default()
            },
        );
        let r = if polished.f <= first.f { polished } else { first };
        if best.as_ref().map_or(true, |b| r.f < b.1) {
            best = Some((r.x, r.f, r.converged));
        }
    }
    let (theta, value, converged) = best.ok_or(SpectralError::DegenerateSpacings)?;
    Ok(SpacingFit {
        spacings: spacings.to_vec(),
        omega: theta[2].exp() - 1.0,
        amplitude: theta[0].exp(),
        beta: theta[1].exp(),
        rss: value,
        converged,
    })
}

/// Exponential (Poisson-statistics) spacings with unit mean.
pub fn synthetic_poisson_spacings(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = NormalStream::new(seed);
    (0..n).map(|_| -(-rng.uniform()).ln_1p()).collect()
}

/// Wigner-surmise spacings `P(s) = (π/2) s e^{−πs²/4}` (unit mean).
pub fn synthetic_wigner_spacings(n: usize, seed: u64) -> Vec<f64> {
    let beta = std::f64::consts::PI / 4.0;
    let mut rng = NormalStream::new(seed);
    (0..n).map(|_| (-(-rng.uniform()).ln_1p() / beta).sqrt()).collect()
}
