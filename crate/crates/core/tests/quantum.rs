use kpo_core::model::{BandedHamiltonian, FockDimension, ModelParams};
use kpo_core::quantum::{
    evolve, husimi, husimi_x2_marginal, propagate, wigner, wigner_x2_marginal, EvolutionConfig, StateVector,
};
use kpo_core::rng::NormalStream;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn dim(n: usize) -> FockDimension {
    FockDimension::new(n).unwrap()
}

/// Normalized random state supported on `n₁, n₂ ≤ support`.
fn random_state(dim: FockDimension, support: usize, seed: u64) -> StateVector {
    let mut rng = NormalStream::new(seed);
    let amps = (0..dim.total())
        .map(|k| {
            let (n1, n2) = dim.occupation(k);
            if n1 <= support && n2 <= support {
                Complex64::new(rng.normal(), rng.normal())
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    StateVector::from_amplitudes(dim, amps).unwrap().normalized()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

struct Trace {
    norm_drift: f64,
    energy_drift: f64,
    odd_parity: f64,
    final_state: StateVector,
}

fn default_run(xi0: f64, n_max: usize) -> Trace {
    let d = dim(n_max);
    let h = BandedHamiltonian::new(&ModelParams::with_coupling(xi0), d);
    let psi0 = StateVector::vacuum(d);
    let e0 = psi0.expectation(&h);
    let mut t = Trace {
        norm_drift: 0.0,
        energy_drift: 0.0,
        odd_parity: 0.0,
        final_state: psi0.clone(),
    };
    let cfg = EvolutionConfig {
        stride: 100,
        ..EvolutionConfig::default()
    };
    let last = evolve(&psi0, &h, &cfg, |s| {
        t.norm_drift = t.norm_drift.max((s.state.norm() - 1.0).abs());
        t.energy_drift = t.energy_drift.max((s.state.expectation(&h) - e0).abs());
        t.odd_parity = t.odd_parity.max(s.state.odd_parity_probability());
        Ok(())
    })
    .unwrap();
    t.norm_drift = t.norm_drift.max((last.norm() - 1.0).abs());
    t.energy_drift = t.energy_drift.max((last.expectation(&h) - e0).abs());
    t.odd_parity = t.odd_parity.max(last.odd_parity_probability());
    t.final_state = last;
    t
}

#[test]
fn default_runs_conserve_norm_energy_and_parity() {
    for xi0 in [0.0, 0.3, 1.0] {
        let t = default_run(xi0, 30);
        assert!(t.norm_drift <= 1e-6, "ξ₀={xi0}: norm drift {:e}", t.norm_drift);
        // ⟨H⟩ = 0 for the vacuum, so the energy tolerance is absolute
        assert!(t.energy_drift <= 1e-6, "ξ₀={xi0}: energy drift {:e}", t.energy_drift);
        assert!(t.odd_parity <= 1e-12, "ξ₀={xi0}: odd parity {:e}", t.odd_parity);
    }
}

#[test]
fn final_norm_is_step_size_converged() {
    let d = dim(30);
    let h = BandedHamiltonian::new(&ModelParams::with_coupling(1.0), d);
    let psi0 = StateVector::vacuum(d);
    let coarse = propagate(&psi0, &h, 1e-3, 20_000).unwrap();
    let fine = propagate(&psi0, &h, 5e-4, 40_000).unwrap();
    assert!((coarse.norm() - 1.0).abs() <= 1e-6);
    assert!((fine.norm() - 1.0).abs() <= 1e-6);
    let overlap = coarse.inner(&fine).norm();
    assert!((overlap - 1.0).abs() < 1e-6, "overlap {overlap}");
}

#[test]
fn truncation_is_stable_from_30_to_40_photons() {
    for xi0 in [0.0, 0.3, 1.0] {
        let a = default_run(xi0, 30).final_state.mean_photons();
        let b = default_run(xi0, 40).final_state.mean_photons();
        let diff = ((a.0 + a.1) - (b.0 + b.1)).abs();
        assert!(diff <= 1e-4, "ξ₀={xi0}: ⟨n₁+n₂⟩ changed by {diff:e}");
    }
}

#[test]
fn evolved_state_does_not_reach_the_cutoff() {
    let t = default_run(1.0, 30);
    assert!(t.final_state.edge_population() < 1e-8);
}

#[test]
fn husimi_integrates_to_one() {
    let d = dim(30);
    let psi = random_state(d, 4, 11);
    // Q = |⟨α₁|⟨α₂|ψ⟩|²/π²; factor the overlap over modes on a 4-D grid
    let (lo, hi, n) = (-6.0, 6.0, 49);
    let h = (hi - lo) / (n - 1) as f64;
    let axis: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
    let coh: Vec<Vec<Complex64>> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| Complex64::new(x, y)))
        .map(|a| {
            kpo_core::quantum::coherent_state(a, 30)
                .iter()
                .map(|c| c.conj())
                .collect()
        })
        .collect();
    let m = psi.as_matrix();
    let mut total = 0.0;
    for c1 in &coh {
        let v: Vec<Complex64> = (0..=30)
            .map(|n2| (0..=30).map(|n1| c1[n1] * m[(n1, n2)]).sum())
            .collect();
        for c2 in &coh {
            let o: Complex64 = v.iter().zip(c2).map(|(a, b)| a * b).sum();
            total += o.norm_sqr();
        }
    }
    total *= h.powi(4) / (PI * PI);
    assert!((total - 1.0).abs() <= 0.02, "∫Q = {total}");
}

#[test]
fn x2_marginals_match_quadrature() {
    let d = dim(10);
    let mut rng = NormalStream::new(5);
    for s in 0..5 {
        let psi = random_state(d, 6, 100 + s);
        for _ in 0..5 {
            let a1 = Complex64::new(rng.normal(), rng.normal());
            let w = wigner_x2_marginal(&psi, a1).unwrap();
            let wq = simpson(|x| wigner(&psi, a1, Complex64::new(x, 0.0)).unwrap(), -20.0, 20.0, 4000);
            assert!((w - wq).abs() <= 1e-6, "W marginal {w} vs {wq}");
            let q = husimi_x2_marginal(&psi, a1);
            let qq = simpson(|x| husimi(&psi, a1, Complex64::new(x, 0.0)), -20.0, 20.0, 4000);
            assert!((q - qq).abs() <= 1e-6, "Q marginal {q} vs {qq}");
        }
    }
}

fn point() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quasi_probabilities_are_bounded(seed in any::<u64>(), a1 in point(), a2 in point()) {
        let psi = random_state(dim(12), 8, seed);
        let q = husimi(&psi, a1, a2);
        prop_assert!(q >= 0.0);
        prop_assert!(q <= (1.0 + 1e-12) / (PI * PI));
        let w = wigner(&psi, a1, a2).unwrap();
        prop_assert!(w.abs() <= (1.0 + 1e-10) * 4.0 / (PI * PI));
    }

    #[test]
    fn evolution_preserves_norm_for_random_states(seed in any::<u64>(), xi0 in 0.0..1.5f64) {
        let d = dim(20);
        let h = BandedHamiltonian::new(&ModelParams::with_coupling(xi0), d);
        let psi = random_state(d, 3, seed);
        let out = propagate(&psi, &h, 1e-3, 500).unwrap();
        prop_assert!((out.norm() - 1.0).abs() <= 1e-9);
    }
}
