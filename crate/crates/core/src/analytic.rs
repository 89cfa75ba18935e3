//! Closed-form results for square-pulse RWA transfer. These are the oracles the
//! simulator is checked against.
//!
//! Conventions: `g` is the pulse area `G₀T`, `δ = ΔT/2` the dimensionless
//! detuning, `g̃ = √(g² + δ²)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Below this `g̃` the sinc-type ratios are evaluated by series.
pub const SMALL_AREA: f64 = 1e-6;

/// Default Bloch–Siegert coefficient.
pub const DEFAULT_KAPPA: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalAmplitudes {
    pub c_minus: C64,
    pub c_plus: C64,
    pub s: f64,
}

/// `sin x / x`, stable near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SMALL_AREA {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

pub fn local_amplitudes(g: f64, delta: f64) -> LocalAmplitudes {
    let gt = g.hypot(delta);
    let sc = sinc(gt);
    let cos = gt.cos();
    let c_minus = C64::new(cos, -delta * sc);
    LocalAmplitudes {
        c_minus,
        c_plus: c_minus.conj(),
        s: g * sc,
    }
}

/// Final amplitudes of one arm as produced by the interaction-picture
/// evolution, including the detuning frame phases `e^{±iδ}`.
///
/// From `|m, e⟩`: `excited_stay |m, e⟩ + excited_transfer |m+1, g⟩`.
/// From `|m, g⟩`: `ground_stay |m, g⟩ + ground_transfer |m−1, e⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMap {
    pub excited_stay: C64,
    pub excited_transfer: C64,
    pub ground_stay: C64,
    pub ground_transfer: C64,
}

pub fn local_map(g: f64, delta: f64) -> LocalMap {
    let a = local_amplitudes(g, delta);
    let up = C64::from_polar(1.0, delta);
    let down = up.conj();
    let minus_is = C64::new(0.0, -a.s);
    LocalMap {
        excited_stay: down * a.c_plus,
        excited_transfer: up * minus_is,
        ground_stay: up * a.c_minus,
        ground_transfer: down * minus_is,
    }
}

/// `P_{G_N}(T) = (g²/g̃²) sin²g̃ · (cos²g̃ + (δ²/g̃²) sin²g̃)^{N−1}`.
pub fn p_heralding(n: usize, g: f64, delta: f64) -> f64 {
    let gt = g.hypot(delta);
    let sc = sinc(gt);
    let transfer = g * g * sc * sc;
    let survival = gt.cos().powi(2) + delta * delta * sc * sc;
    transfer * survival.powi(n as i32 - 1)
}

/// `cos² g_opt = (N−1)/N`.
pub fn g_optimal(n: usize) -> f64 {
    assert!(n >= 1, "at least one arm");
    (((n - 1) as f64) / n as f64).sqrt().acos()
}

/// `(1/N)((N−1)/N)^{N−1}`.
pub fn p_max(n: usize) -> f64 {
    assert!(n >= 1, "at least one arm");
    if n == 1 {
        return 1.0;
    }
    let nf = n as f64;
    ((nf - 1.0) / nf).powi(n as i32 - 1) / nf
}

pub fn p_max_asymptotic(n: usize) -> f64 {
    (-1.0f64).exp() / n as f64
}

/// Partial-transpose eigenvalues of the two-party reduction of `|W_N⟩`:
/// `(λ₋, λ₊, 1/N, 1/N)`.
pub fn pt_eigenvalues_wn(n: usize) -> [f64; 4] {
    assert!(n >= 2, "pairs need two arms");
    let nf = n as f64;
    let a = nf - 2.0;
    let r = (a * a + 4.0).sqrt();
    [
        (a - r) / (2.0 * nf),
        (a + r) / (2.0 * nf),
        1.0 / nf,
        1.0 / nf,
    ]
}

/// `(√((N−2)²+4) − (N−2)) / (2N)`.
pub fn pairwise_negativity_wn(n: usize) -> f64 {
    -pt_eigenvalues_wn(n)[0]
}

/// Pair negativity of parties (a, b) in `α|100⟩ + β|010⟩ + γ|001⟩` where γ
/// belongs to the traced party.
pub fn weighted_pair_negativity(alpha: f64, beta: f64, gamma: f64) -> f64 {
    let h = 0.5 * gamma * gamma;
    (h * h + (alpha * beta).powi(2)).sqrt() - h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaWeights {
    pub alpha: Vec<C64>,
    /// `|α_j|² / Σ_k |α_k|²`.
    pub weights: Vec<f64>,
}

/// `α_j = e^{iφ_j} s_j Π_{k≠j} c_{k,−}`.
pub fn alpha_weights(areas: &[f64], deltas: &[f64], phases: &[f64]) -> AlphaWeights {
    assert!(
        areas.len() == deltas.len() && areas.len() == phases.len(),
        "equal-length arm lists"
    );
    let locals: Vec<LocalAmplitudes> = areas
        .iter()
        .zip(deltas)
        .map(|(&g, &d)| local_amplitudes(g, d))
        .collect();
    let alpha: Vec<C64> = (0..areas.len())
        .map(|j| {
            let spectators: C64 = locals
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, l)| l.c_minus)
                .product();
            C64::from_polar(1.0, phases[j]) * locals[j].s * spectators
        })
        .collect();
    let total: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    let weights = alpha
        .iter()
        .map(|a| {
            if total > 0.0 {
                a.norm_sqr() / total
            } else {
                0.0
            }
        })
        .collect();
    AlphaWeights { alpha, weights }
}

/// Unnormalized heralded electron amplitudes on `|E_j^{(+)}⟩` for a general
/// single-excitation input `c_j`, in the simulator's interaction frame:
/// `−i Π_l e^{iδ_l} · c_j s_j Π_{k≠j} c_{k,−}`.
pub fn heralded_branch_amplitudes(areas: &[f64], deltas: &[f64], inputs: &[C64]) -> Vec<C64> {
    assert!(
        areas.len() == deltas.len() && areas.len() == inputs.len(),
        "equal-length arm lists"
    );
    let zero = vec![0.0; areas.len()];
    let aw = alpha_weights(areas, deltas, &zero);
    let frame = C64::new(0.0, -1.0) * C64::from_polar(1.0, deltas.iter().sum());
    aw.alpha
        .iter()
        .zip(inputs)
        .map(|(a, c)| frame * c * a)
        .collect()
}

/// `|Σ_j α_j e^{−iφ_j}|² / (N Σ_j |α_j|²)`.
pub fn fidelity_perturbed(alpha: &[C64], phases: &[f64]) -> Result<f64> {
    assert_eq!(alpha.len(), phases.len(), "one phase per pathway");
    let total: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    if total == 0.0 {
        return Err(Error::DegenerateHerald(0.0));
    }
    let coherent: C64 = alpha
        .iter()
        .zip(phases)
        .map(|(a, &p)| a * C64::from_polar(1.0, -p))
        .sum();
    Ok(coherent.norm_sqr() / (alpha.len() as f64 * total))
}

/// Leading-order infidelity `(1/N) Σ_j |ε_j − ε̄|²` for `α_j e^{−iφ_j} = ᾱ(1 + ε_j)`.
pub fn variance_law_infidelity(eps: &[C64]) -> f64 {
    let n = eps.len() as f64;
    let mean: C64 = eps.iter().sum::<C64>() / n;
    eps.iter().map(|e| (e - mean).norm_sqr()).sum::<f64>() / n
}

/// `δ_eff = ΔT/2 + κ g² / (Ω₊T)`.
pub fn bloch_siegert_delta_eff(
    g: f64,
    detuning: f64,
    window: f64,
    omega_plus: f64,
    kappa: f64,
) -> Result<f64> {
    let wt = omega_plus * window;
    if wt.is_nan() || wt <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "Omega_plus * T = {wt} must be positive"
        )));
    }
    Ok(0.5 * detuning * window + kappa * g * g / wt)
}

pub fn p_bloch_siegert(
    n: usize,
    g: f64,
    detuning: f64,
    window: f64,
    omega_plus: f64,
    kappa: f64,
) -> Result<f64> {
    Ok(p_heralding(
        n,
        g,
        bloch_siegert_delta_eff(g, detuning, window, omega_plus, kappa)?,
    ))
}

/// `((√5−1)/6) sin²g cos⁴g`, the resonant three-arm pair yield.
pub fn pair_yield_w3(g: f64) -> f64 {
    pairwise_negativity_wn(3) * p_heralding(3, g, 0.0)
}

/// Witness value `(N−1)/N − F` for fidelity `F` to the target.
pub fn witness_from_fidelity(n: usize, fidelity: f64) -> f64 {
    (n as f64 - 1.0) / n as f64 - fidelity
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn local_amplitude_examples() {
        let a = local_amplitudes(FRAC_PI_2, 0.0);
        assert_abs_diff_eq!(a.c_minus.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.s, 1.0, epsilon = 1e-15);
        let b = local_amplitudes(0.0, 1.0);
        assert_abs_diff_eq!(
            (b.c_minus - C64::from_polar(1.0, -1.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(b.s, 0.0);
        let c = local_amplitudes(1.0, 1.0);
        assert_abs_diff_eq!(c.s, 2f64.sqrt().sin() / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.s, 0.69846, epsilon = 1e-5);
    }

    #[test]
    fn small_area_branch_is_continuous() {
        for &d in &[0.0, 3e-7, -5e-7] {
            for &g in &[0.0, 1e-7, 9.99e-7, 1.001e-6] {
                let a = local_amplitudes(g, d);
                let gt: f64 = g.hypot(d);
                let direct_s = if gt > 0.0 { g * gt.sin() / gt } else { 0.0 };
                assert_abs_diff_eq!(a.s, direct_s, epsilon = 1e-18);
                assert_abs_diff_eq!(a.c_minus.norm_sqr() + a.s * a.s, 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn unitarity_grid() {
        for i in 0..100 {
            for k in 0..100 {
                let g = 3.0 * i as f64 / 99.0;
                let d = -4.0 + 8.0 * k as f64 / 99.0;
                let a = local_amplitudes(g, d);
                assert!((a.c_minus.norm_sqr() + a.s * a.s - 1.0).abs() < 1e-12);
                assert_eq!(a.c_plus, a.c_minus.conj());
            }
        }
    }

    #[test]
    fn heralding_matches_amplitude_form() {
        for n in 1..=6 {
            for i in 0..40 {
                for k in 0..40 {
                    let g = 2.0 * i as f64 / 39.0;
                    let d = -2.0 + 4.0 * k as f64 / 39.0;
                    let a = local_amplitudes(g, d);
                    let direct = a.s * a.s * a.c_minus.norm_sqr().powi(n as i32 - 1);
                    assert!((p_heralding(n, g, d) - direct).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn heralding_examples() {
        assert_abs_diff_eq!(
            p_heralding(3, g_optimal(3), 0.0),
            4.0 / 27.0,
            epsilon = 1e-15
        );
        assert_eq!(p_heralding(4, 0.0, 0.3), 0.0);
        assert_abs_diff_eq!(p_heralding(2, FRAC_PI_4, 0.0), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn optimum_examples() {
        assert_abs_diff_eq!(g_optimal(3), 0.61548, epsilon = 1e-5);
        assert_abs_diff_eq!(p_max(3), 4.0 / 27.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g_optimal(1), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(p_max(1), 1.0);
        let ratio = p_max(100) / p_max_asymptotic(100);
        assert!((1.0..=1.01).contains(&ratio), "{ratio}");
        assert_abs_diff_eq!(p_max(8), 0.0490870, epsilon = 1e-7);
    }

    #[test]
    fn optimum_agrees_with_dense_grid_search() {
        for n in 1..=12 {
            let (mut best_g, mut best_p) = (0.0, -1.0);
            let steps = 200_000;
            for i in 0..=steps {
                let g = FRAC_PI_2 * i as f64 / steps as f64;
                let p = p_heralding(n, g, 0.0);
                if p > best_p {
                    best_p = p;
                    best_g = g;
                }
            }
            assert!(
                (best_g - g_optimal(n)).abs() <= FRAC_PI_2 / steps as f64,
                "N={n}"
            );
            assert!((best_p - p_max(n)).abs() < 1e-10);
        }
    }

    #[test]
    fn pair_negativity_examples() {
        assert_abs_diff_eq!(
            pairwise_negativity_wn(3),
            (5f64.sqrt() - 1.0) / 6.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(pairwise_negativity_wn(2), 0.5, epsilon = 1e-15);
        let large = pairwise_negativity_wn(1000) * 1e6;
        assert!((large - 1.0).abs() < 0.01);
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(
            weighted_pair_negativity(s, s, s),
            pairwise_negativity_wn(3),
            epsilon = 1e-15
        );
    }

    #[test]
    fn alpha_and_fidelity() {
        let aw = alpha_weights(&[0.6; 3], &[0.2; 3], &[0.0; 3]);
        for w in &aw.weights {
            assert_abs_diff_eq!(*w, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(
            fidelity_perturbed(&aw.alpha, &[0.0; 3]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert_abs_diff_eq!(
            fidelity_perturbed(&[one, zero, zero], &[0.0; 3]).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        assert!(fidelity_perturbed(&[zero; 3], &[0.0; 3]).is_err());
        let phases = [0.3, -1.1, 2.0];
        let phased = alpha_weights(&[0.6; 3], &[0.0; 3], &phases);
        assert_abs_diff_eq!(
            fidelity_perturbed(&phased.alpha, &phases).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn variance_law_second_order() {
        let eps = [
            C64::new(1e-3, 2e-4),
            C64::new(-4e-4, -3e-4),
            C64::new(-2e-4, 5e-4),
        ];
        let alpha: Vec<C64> = eps
            .iter()
            .map(|e| C64::new(0.37, 0.1) * (1.0 + e))
            .collect();
        let exact = 1.0 - fidelity_perturbed(&alpha, &[0.0; 3]).unwrap();
        let approx = variance_law_infidelity(&eps);
        assert!(((exact - approx) / approx).abs() < 0.01);
    }

    #[test]
    fn bloch_siegert_examples() {
        assert_abs_diff_eq!(
            bloch_siegert_delta_eff(0.6, 0.4, 3.0, 2.0, 0.0).unwrap(),
            0.6,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            bloch_siegert_delta_eff(0.6, 0.0, 10.0, 2.0, 6.0).unwrap(),
            0.108,
            epsilon = 1e-15
        );
        assert!(bloch_siegert_delta_eff(0.6, 0.0, 0.0, 2.0, 6.0).is_err());
        let far = bloch_siegert_delta_eff(0.6, 0.0, 1e9, 2.0, 6.0).unwrap();
        assert!(far < 1e-8);
    }

    #[test]
    fn yield_peak() {
        let peak = pair_yield_w3(g_optimal(3));
        assert_abs_diff_eq!(
            peak,
            (5f64.sqrt() - 1.0) / 6.0 * 4.0 / 27.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(peak, 0.030520, epsilon = 1e-6);
    }

    #[test]
    fn binary_entropy_of_w3_marginal() {
        assert_abs_diff_eq!(binary_entropy(1.0 / 3.0), 0.91830, epsilon = 1e-5);
        assert_eq!(binary_entropy(0.0), 0.0);
    }
}
