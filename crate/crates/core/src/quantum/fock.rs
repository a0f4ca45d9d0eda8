//! Single-mode photon-number-basis primitives: coherent-state amplitudes,
//! displacement-operator matrix elements and the analytic x₂-marginal
//! matrices used by the quantum surface of section.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// `ln n!` for `n = 0..=n_max`.
pub fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n_max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Coherent-state amplitudes `⟨n|α⟩ = αⁿ/√(n!) e^{−|α|²/2}` for `n = 0..=n_max`.
///
/// Logs a warning when `|α|² > n_max/2`, where truncation starts to cut
/// noticeable probability.
pub fn coherent_state(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    if alpha.norm_sqr() > 0.5 * n_max as f64 {
        log::warn!(
            "coherent state |α|² = {:.3} exceeds n_max/2 = {:.1}; truncation loss {:.2e}",
            alpha.norm_sqr(),
            0.5 * n_max as f64,
            coherent_truncation_loss(alpha, n_max)
        );
    }
    coherent_amplitudes(alpha, n_max)
}

pub(crate) fn coherent_amplitudes(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Probability `1 − Σₙ |⟨n|α⟩|²` lost to truncation.
pub fn coherent_truncation_loss(alpha: Complex64, n_max: usize) -> f64 {
    let kept: f64 = coherent_amplitudes(alpha, n_max).iter().map(|c| c.norm_sqr()).sum();
    (1.0 - kept).max(0.0)
}

/// Generalized Laguerre polynomials `L_k^{(a)}(x)` for `k = 0..=k_max` by the
/// three-term recurrence.
fn laguerre_column(a: usize, x: f64, k_max: usize) -> Vec<f64> {
    let a = a as f64;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(1.0);
    if k_max == 0 {
        return out;
    }
    out.push(1.0 + a - x);
    for k in 1..k_max {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Matrix `D_{m,n}(α) = ⟨m|exp(α a† − α* a)|n⟩` for `0 ≤ m, n ≤ n_max`.
///
/// Uses the closed form
/// `D_{m,n} = √(n!/m!) αᵐ⁻ⁿ e^{−|α|²/2} L_n^{(m−n)}(|α|²)` for `m ≥ n` (and the
/// mirrored expression with `−α*` for `m < n`). Magnitudes are combined in log
/// space so large `|α|` neither overflows nor loses precision to
/// cancellation.
pub fn displacement_matrix(alpha: Complex64, n_max: usize) -> DMatrix<Complex64> {
    let d = n_max + 1;
    let lnf = ln_factorials(n_max);
    let x = alpha.norm_sqr();
    let r = x.sqrt();
    let theta = alpha.arg();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for a in 0..d {
        if a > 0 && r == 0.0 {
            continue;
        }
        let lag = laguerre_column(a, x, n_max - a);
        let ln_r = if a > 0 { a as f64 * r.ln() } else { 0.0 };
        let lower_phase = Complex64::from_polar(1.0, a as f64 * theta);
        // (−α*)ᵃ = rᵃ e^{ia(π − θ)}
        let upper_phase = Complex64::from_polar(1.0, a as f64 * (PI - theta));
        for (k, &l) in lag.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let ln_mag = 0.5 * (lnf[k] - lnf[k + a]) + ln_r - 0.5 * x + l.abs().ln();
            let mag = l.signum() * ln_mag.exp();
            out[(k + a, k)] = lower_phase * mag;
            if a > 0 {
                out[(k, k + a)] = upper_phase * mag;
            }
        }
    }
    out
}

/// Single displacement element `D_{m,n}(α)`.
pub fn displacement_element(m: usize, n: usize, alpha: Complex64) -> Complex64 {
    let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
    let a = hi - lo;
    let x = alpha.norm_sqr();
    if a > 0 && x == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let l = laguerre_column(a, x, lo)[lo];
    if l == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let lnf = ln_factorials(hi);
    let ln_r = if a > 0 { 0.5 * a as f64 * x.ln() } else { 0.0 };
    let ln_mag = 0.5 * (lnf[lo] - lnf[hi]) + ln_r - 0.5 * x + l.abs().ln();
    let mag = l.signum() * ln_mag.exp();
    let theta = alpha.arg();
    let phase = if m >= n {
        Complex64::from_polar(1.0, a as f64 * theta)
    } else {
        Complex64::from_polar(1.0, a as f64 * (PI - theta))
    };
    phase * mag
}

/// `M[m, n] = ∫ dx D_{m,n}(2x)`.
///
/// The alternating finite sum for this integral cancels badly at large
/// photon numbers (≈10⁻³ absolute error at n = 30 in double precision). It
/// equals `(π/2)⟨m|δ(ŷ)|n⟩`, which factorizes as `√(π/2) g_m g_n` with
/// `g_m = √((m−1)!!/m!!)` for even `m` and zero for odd `m`.
pub fn marginal_x2_wigner_matrix(n_max: usize) -> DMatrix<f64> {
    let d = n_max + 1;
    let mut g = vec![0.0; d];
    g[0] = 1.0;
    let mut m = 2;
    while m < d {
        g[m] = g[m - 2] * ((m - 1) as f64 / m as f64).sqrt();
        m += 2;
    }
    let scale = (PI / 2.0).sqrt();
    DMatrix::from_fn(d, d, |m, n| scale * g[m] * g[n])
}

/// `N[m, n] = ∫ dx ⟨x|m⟩⟨n|x⟩` with `|x⟩` the coherent state of real amplitude `x`:
/// `√(π/(m! n!)) (m+n−1)!! / 2^{(m+n)/2}` for even `m+n`, zero otherwise.
pub fn marginal_x2_husimi_matrix(n_max: usize) -> DMatrix<f64> {
    let d = n_max + 1;
    let lnf = ln_factorials(2 * n_max);
    let ln2 = std::f64::consts::LN_2;
    DMatrix::from_fn(d, d, |m, n| {
        let s = m + n;
        if s % 2 == 1 {
            return 0.0;
        }
        let k = s / 2;
        // ln (2k−1)!! = ln (2k)! − k ln 2 − ln k!
        let ln_dfact = lnf[s] - k as f64 * ln2 - lnf[k];
        (0.5 * PI.ln() - 0.5 * (lnf[m] + lnf[n]) + ln_dfact - k as f64 * ln2).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Finite sum from the number-basis expansion, evaluated literally. Only
    /// accurate for modest `|α|` and photon numbers.
    fn displacement_by_sum(m: usize, n: usize, alpha: Complex64) -> Complex64 {
        let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
        let mut s = c(0.0, 0.0);
        for k in 0..=m.min(n) {
            s += alpha.powu((m - k) as u32) * (-alpha.conj()).powu((n - k) as u32)
                / (fact(k) * fact(m - k) * fact(n - k));
        }
        s * (-0.5 * alpha.norm_sqr()).exp() * (fact(m) * fact(n)).sqrt()
    }

    #[test]
    fn coherent_examples() {
        let v = coherent_state(c(0.0, 0.0), 30);
        assert_eq!(v[0], c(1.0, 0.0));
        assert!(v[1..].iter().all(|z| z.norm() == 0.0));
        let v = coherent_state(c(1.0, 0.0), 30);
        assert!((v[0].re - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v[0].re - 0.60653).abs() < 1e-5);
        assert!(coherent_truncation_loss(c(0.0, 0.5), 30) <= 1e-10);
    }

    #[test]
    fn coherent_tail_bound() {
        // Poisson tail: P(n > N) ≤ e^{−λ} λ^{N+1}/(N+1)! · 1/(1 − λ/(N+2))
        let lambda: f64 = 0.25;
        let lnf = ln_factorials(31);
        let bound = (-lambda + 31.0 * lambda.ln() - lnf[31]).exp() / (1.0 - lambda / 32.0);
        assert!(coherent_truncation_loss(c(0.0, 0.5), 30) <= bound + 1e-16);
    }

    #[test]
    fn displacement_simple_elements() {
        let a = c(2.0, 0.0);
        assert!((displacement_element(0, 0, a).re - (-2.0f64).exp()).abs() < 1e-15);
        assert!((displacement_element(0, 0, a).re - 0.13534).abs() < 1e-5);
        let a = c(1.0, 1.0);
        let expected = a * (-1.0f64).exp();
        assert!((displacement_element(1, 0, a) - expected).norm() < 1e-15);
        assert!((displacement_element(0, 1, a) + a.conj() * (-1.0f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn displacement_against_high_precision_reference() {
        // 50-digit evaluation of the finite sum
        let ref53 = c(-0.095_978_085_789_153_92, 0.169_729_667_500_819_55);
        let got = displacement_element(5, 3, c(1.2, -0.7));
        assert!((got - ref53).norm() <= 1e-12 * ref53.norm());
        // large argument, where the literal sum is useless in double precision
        let ref_far = c(-0.156_512_859_425_711_88, 0.0);
        let got = displacement_element(30, 10, c(6.0, 6.0));
        assert!((got - ref_far).norm() <= 1e-10, "{got}");
    }

    #[test]
    fn displacement_matrix_matches_literal_sum_for_small_arguments() {
        for alpha in [c(0.3, -0.2), c(-0.8, 0.5), c(1.1, 0.9)] {
            let d = displacement_matrix(alpha, 10);
            for m in 0..=10 {
                for n in 0..=10 {
                    let want = displacement_by_sum(m, n, alpha);
                    assert!((d[(m, n)] - want).norm() < 1e-11, "({m},{n}) at {alpha}");
                    assert!((d[(m, n)] - displacement_element(m, n, alpha)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn displacement_is_unitary_on_low_block() {
        // Columns for small n are almost fully contained in a larger truncation.
        let alpha = c(0.7, -0.4);
        let d = displacement_matrix(alpha, 40);
        for n in 0..5 {
            for k in 0..5 {
                let dot: Complex64 = (0..=40).map(|m| d[(m, n)].conj() * d[(m, k)]).sum();
                let want = if n == k { 1.0 } else { 0.0 };
                assert!((dot - c(want, 0.0)).norm() < 1e-12);
            }
        }
        assert_eq!(displacement_matrix(c(0.0, 0.0), 5), DMatrix::identity(6, 6));
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn wigner_marginal_examples() {
        let m = marginal_x2_wigner_matrix(30);
        // ∫ e^{−2x²} dx
        assert!((m[(0, 0)] - (PI / 2.0).sqrt()).abs() < 1e-15);
        assert_eq!(m[(1, 0)], 0.0);
        let quad = simpson(|x| displacement_element(2, 2, c(2.0 * x, 0.0)).re, -20.0, 20.0, 20_000);
        assert!((m[(2, 2)] - quad).abs() < 1e-8);
        assert!((m[(30, 30)] - 0.181_059_335_136_152_67).abs() < 1e-14);
    }

    #[test]
    fn wigner_marginal_matches_quadrature() {
        let m = marginal_x2_wigner_matrix(30);
        for (a, b) in [(0, 2), (4, 6), (3, 5), (10, 12), (1, 1)] {
            let quad = simpson(|x| displacement_element(a, b, c(2.0 * x, 0.0)).re, -20.0, 20.0, 20_000);
            assert!((m[(a, b)] - quad).abs() < 1e-8, "({a},{b}): {} vs {quad}", m[(a, b)]);
        }
    }

    #[test]
    fn wigner_marginal_matches_alternating_sum_at_low_order() {
        // The finite sum is well-conditioned for small indices.
        let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
        let dfact = |k: i64| {
            let mut p = 1.0;
            let mut v = k;
            while v > 1 {
                p *= v as f64;
                v -= 2;
            }
            p
        };
        let m = marginal_x2_wigner_matrix(12);
        for a in 0..=12usize {
            for b in 0..=12usize {
                let want = if (a + b) % 2 == 1 {
                    0.0
                } else {
                    let s: f64 = (0..=a.min(b))
                        .map(|k| {
                            let sign = if (b - k) % 2 == 0 { 1.0 } else { -1.0 };
                            sign * dfact((a + b - 2 * k) as i64 - 1) / (fact(k) * fact(a - k) * fact(b - k))
                        })
                        .sum();
                    (PI / 2.0 * fact(a) * fact(b)).sqrt() * s
                };
                assert!((m[(a, b)] - want).abs() < 1e-9, "({a},{b})");
            }
        }
    }

    #[test]
    fn husimi_marginal_examples() {
        let n = marginal_x2_husimi_matrix(30);
        assert!((n[(0, 0)] - PI.sqrt()).abs() < 1e-14);
        assert_eq!(n[(0, 1)], 0.0);
        assert!((n[(1, 1)] - PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((n[(1, 1)] - 0.88623).abs() < 1e-5);
        for (a, b) in [(0, 2), (3, 5), (7, 7), (20, 22)] {
            let quad = simpson(
                |x| {
                    let v = coherent_amplitudes(c(x, 0.0), 30);
                    (v[a].conj() * v[b]).re
                },
                -20.0,
                20.0,
                20_000,
            );
            assert!((n[(a, b)] - quad).abs() < 1e-9, "({a},{b})");
        }
    }
}
