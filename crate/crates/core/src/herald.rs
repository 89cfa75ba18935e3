//! Heralding on the all-ground TLS outcome, electron targets and fidelities.

use nalgebra::{DMatrix, DVector};

use crate::hilbert::{strides_for, DensityMatrix, Ket, PureState};
use crate::{Error, Result, C64};

/// Heralding probabilities below this are treated as inaccessible.
pub const DEGENERATE_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct HeraldResult {
    pub probability: f64,
    /// Normalized electron state after the herald, `None` when the outcome is
    /// not operationally accessible.
    pub conditional: Option<Ket>,
    /// Unnormalized amplitudes on `|E_j^{(+)}⟩`.
    pub branch_amplitudes: Vec<C64>,
    pub sideband_cut: usize,
}

impl HeraldResult {
    pub fn is_accessible(&self) -> bool {
        self.conditional.is_some()
    }

    pub fn conditional_state(&self) -> Option<DensityMatrix> {
        self.conditional.as_ref().map(Ket::density)
    }

    fn conditional_ket(&self) -> Result<&Ket> {
        self.conditional
            .as_ref()
            .ok_or(Error::DegenerateHerald(self.probability))
    }

    /// Weight of the conditional state outside span{|E_j^{(+)}⟩}.
    pub fn support_leakage(&self) -> Result<f64> {
        self.conditional_ket()?;
        let inside: f64 = self.branch_amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Ok((1.0 - inside / self.probability).max(0.0))
    }
}

/// Electron basis used for targets: full truncated ladders or the two-level
/// `{0, +}` encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElectronEncoding {
    Ladder { cut: usize },
    Qubit,
}

impl ElectronEncoding {
    pub fn local_dim(&self) -> usize {
        match self {
            Self::Ladder { cut } => 2 * cut + 1,
            Self::Qubit => 2,
        }
    }

    fn level(&self, offset: i64) -> usize {
        match self {
            Self::Ladder { cut } => (offset + *cut as i64) as usize,
            Self::Qubit => offset as usize,
        }
    }

    /// Flat index of `|E_j^{(+)}⟩` among `n` electrons.
    pub fn upper_index(&self, n: usize, j: usize) -> usize {
        let d = self.local_dim();
        let zero = self.level(0);
        let plus = self.level(1);
        (0..n).fold(0, |acc, l| acc * d + if l == j { plus } else { zero })
    }
}

fn electron_index(state: &PureState, e_idx: usize) -> usize {
    e_idx << state.basis.arm_count()
}

/// Project onto `|g…g⟩` on every TLS.
pub fn project_all_ground(state: &PureState) -> HeraldResult {
    let b = &state.basis;
    let n = b.arm_count();
    let ne = b.electron_dim();
    let branch = DVector::from_iterator(
        ne,
        (0..ne).map(|e| state.amplitudes[electron_index(state, e)]),
    );
    let probability = branch.norm_squared();
    let enc = ElectronEncoding::Ladder {
        cut: b.sideband_cut(),
    };
    let branch_amplitudes = (0..n).map(|j| branch[enc.upper_index(n, j)]).collect();
    let conditional = (probability >= DEGENERATE_PROBABILITY).then(|| Ket {
        dims: vec![b.ladder_dim(); n],
        amplitudes: branch / C64::new(probability.sqrt(), 0.0),
    });
    HeraldResult {
        probability,
        conditional,
        branch_amplitudes,
        sideband_cut: b.sideband_cut(),
    }
}

/// `Σ_j w_j |E_j^{(+)}⟩` in the chosen encoding.
pub fn target_w_state(n: usize, weights: &[C64], encoding: ElectronEncoding) -> Result<Ket> {
    if n == 0 || weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {n} electrons",
            weights.len()
        )));
    }
    let norm_sqr: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let d = encoding.local_dim();
    let mut amps = DVector::zeros(d.pow(n as u32));
    for (j, w) in weights.iter().enumerate() {
        amps[encoding.upper_index(n, j)] = *w;
    }
    Ket::new(vec![d; n], amps)
}

pub fn symmetric_w_target(n: usize, encoding: ElectronEncoding) -> Ket {
    let w = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    target_w_state(n, &vec![w; n], encoding).expect("normalized by construction")
}

/// `⟨target|ρ_cond|target⟩`.
pub fn conditional_fidelity(herald: &HeraldResult, target: &Ket) -> Result<f64> {
    let ket = herald.conditional_ket()?;
    if ket.dims != target.dims {
        return Err(Error::DimensionMismatch(format!(
            "target dims {:?} vs state dims {:?}",
            target.dims, ket.dims
        )));
    }
    Ok(target.inner(ket).norm_sqr())
}

/// `Tr_TLS |Ψ⟩⟨Ψ|`.
pub fn unconditional_electron_state(state: &PureState) -> DensityMatrix {
    let keep: Vec<usize> = (0..state.basis.arm_count()).collect();
    state
        .reduced_density(&keep)
        .expect("electron subsystems are valid")
}

/// Probability of every TLS outcome, indexed by the bit pattern with arm 1 as
/// the most significant bit.
pub fn branch_probabilities(state: &PureState) -> Vec<f64> {
    let n = state.basis.arm_count();
    let mut out = vec![0.0; 1 << n];
    for (i, a) in state.amplitudes.iter().enumerate() {
        out[i & ((1 << n) - 1)] += a.norm_sqr();
    }
    out
}

/// `⟨target|ρ_e|target⟩` for a ladder-encoded target, without forming `ρ_e`.
pub fn target_manifold_weight(state: &PureState, target: &Ket) -> Result<f64> {
    let b = &state.basis;
    let n = b.arm_count();
    if target.dims != vec![b.ladder_dim(); n] {
        return Err(Error::DimensionMismatch(format!(
            "target dims {:?} do not match the electron ladders",
            target.dims
        )));
    }
    let outcomes = 1usize << n;
    let support: Vec<(usize, C64)> = target
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, a)| (i, a.conj()))
        .collect();
    Ok((0..outcomes)
        .map(|t| {
            support
                .iter()
                .map(|&(e, w)| w * state.amplitudes[(e << n) + t])
                .sum::<C64>()
                .norm_sqr()
        })
        .sum())
}

/// Restrict a ladder-encoded electron ket to the `{0, +}` encoding. Returns the
/// normalized compressed ket and the discarded weight.
pub fn compress_ket(ket: &Ket, cut: usize) -> Result<(Ket, f64)> {
    let n = ket.dims.len();
    let keep = qubit_indices(n, cut);
    let amps = DVector::from_iterator(keep.len(), keep.iter().map(|&i| ket.amplitudes[i]));
    let total = ket.norm_sqr();
    let kept = amps.norm_squared();
    if kept == 0.0 {
        return Err(Error::OutOfManifold(total));
    }
    let out = Ket::new(vec![2; n], amps / C64::new(kept.sqrt(), 0.0))?;
    Ok((out, (total - kept).max(0.0)))
}

/// Restrict a ladder-encoded electron density matrix to the `{0, +}` encoding,
/// renormalized, with the discarded weight.
pub fn compress_density(rho: &DensityMatrix, cut: usize) -> Result<(DensityMatrix, f64)> {
    let n = rho.dims().len();
    let keep = qubit_indices(n, cut);
    let m = DMatrix::from_fn(keep.len(), keep.len(), |a, b| {
        rho.matrix()[(keep[a], keep[b])]
    });
    let kept = m.trace().re;
    if kept <= 0.0 {
        return Err(Error::OutOfManifold(1.0));
    }
    Ok((
        DensityMatrix::from_psd(vec![2; n], m),
        (1.0 - kept).max(0.0),
    ))
}

/// Ladder indices of the `2^n` configurations with every offset in `{0, +1}`,
/// ordered like the qubit encoding.
fn qubit_indices(n: usize, cut: usize) -> Vec<usize> {
    let d = 2 * cut + 1;
    let strides = strides_for(&vec![d; n]);
    (0..1usize << n)
        .map(|bits| {
            (0..n)
                .map(|l| strides[l] * (cut + ((bits >> (n - 1 - l)) & 1)))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{alpha_weights, fidelity_perturbed, p_heralding};
    use crate::evolve::{propagate, IntegratorSpec};
    use crate::hamiltonian::SystemConfig;
    use crate::hilbert::{build_basis, product_state, AtomicAmplitudes};

    fn evolve(cfg: &SystemConfig) -> PureState {
        let basis = build_basis(cfg).unwrap();
        let s0 = product_state(&basis, &vec![0; cfg.arm_count()], &cfg.atomic).unwrap();
        propagate(
            &s0,
            cfg,
            0.0,
            cfg.window(),
            &IntegratorSpec::for_config(cfg),
        )
        .unwrap()
    }

    #[test]
    fn ground_product_state_heralds_with_certainty() {
        let cfg = SystemConfig::symmetric(2, 0.0, 0.0);
        let atomic = AtomicAmplitudes {
            excited: vec![C64::new(0.0, 0.0); 2],
            ground: C64::new(1.0, 0.0),
        };
        let s = product_state(&build_basis(&cfg).unwrap(), &[0, 0], &atomic).unwrap();
        let h = project_all_ground(&s);
        assert!((h.probability - 1.0).abs() < 1e-15);
        let ket = h.conditional.unwrap();
        let reference = ElectronEncoding::Ladder { cut: 2 };
        let idx = (0..2).fold(0, |acc, _| acc * reference.local_dim() + 2);
        assert!((ket.amplitudes[idx].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_run_heralds_w_state() {
        for &g in &[0.3, 0.61548, 1.2] {
            let cfg = SystemConfig::symmetric(3, g, 0.0);
            let s = evolve(&cfg);
            let h = project_all_ground(&s);
            assert!((h.probability - g.sin().powi(2) * g.cos().powi(4)).abs() < 1e-9);
            let w = symmetric_w_target(3, ElectronEncoding::Ladder { cut: 2 });
            assert!((conditional_fidelity(&h, &w).unwrap() - 1.0).abs() < 1e-9);
            assert!(h.support_leakage().unwrap() < 1e-10);
            assert!((target_manifold_weight(&s, &w).unwrap() - h.probability).abs() < 1e-9);
            let rho = unconditional_electron_state(&s);
            assert!((rho.expectation(&w.amplitudes) - h.probability).abs() < 1e-9);
            assert!((branch_probabilities(&s).iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn detuned_probability() {
        let cfg = SystemConfig::symmetric(2, 0.9, 0.7);
        let h = project_all_ground(&evolve(&cfg));
        assert!((h.probability - p_heralding(2, 0.9, 0.7)).abs() < 1e-9);
    }

    #[test]
    fn mismatch_fidelity_matches_closed_form() {
        let areas = [0.7, 0.6, 0.5];
        let deltas = [0.1, -0.2, 0.25];
        let phases = [0.0, 0.8, -1.3];
        let cfg = SystemConfig::square_arms(&areas, &deltas)
            .with_atomic(AtomicAmplitudes::phased_w(&phases));
        let h = project_all_ground(&evolve(&cfg));
        let aw = alpha_weights(&areas, &deltas, &phases);
        let expected = fidelity_perturbed(&aw.alpha, &phases).unwrap();
        let third = 1.0 / 3f64.sqrt();
        let weights: Vec<C64> = phases.iter().map(|&p| C64::from_polar(third, p)).collect();
        let target = target_w_state(3, &weights, ElectronEncoding::Ladder { cut: 2 }).unwrap();
        assert!((conditional_fidelity(&h, &target).unwrap() - expected).abs() < 1e-7);
    }

    #[test]
    fn targets() {
        let w = symmetric_w_target(3, ElectronEncoding::Qubit);
        let third = 1.0 / 3f64.sqrt();
        for idx in [4, 2, 1] {
            assert!((w.amplitudes[idx].re - third).abs() < 1e-15);
        }
        assert!((w.norm_sqr() - 1.0).abs() < 1e-15);
        let single = target_w_state(1, &[C64::new(1.0, 0.0)], ElectronEncoding::Qubit).unwrap();
        assert_eq!(single.amplitudes[1], C64::new(1.0, 0.0));
        assert!(target_w_state(2, &[C64::new(1.0, 0.0); 2], ElectronEncoding::Qubit).is_err());
    }

    #[test]
    fn degenerate_and_orthogonal_cases() {
        let cfg = SystemConfig::symmetric(2, std::f64::consts::FRAC_PI_2, 0.0);
        let h = project_all_ground(&evolve(&cfg));
        assert!(!h.is_accessible());
        let w = symmetric_w_target(2, ElectronEncoding::Ladder { cut: 2 });
        assert!(matches!(
            conditional_fidelity(&h, &w),
            Err(Error::DegenerateHerald(_))
        ));

        let cfg = SystemConfig::symmetric(2, 0.5, 0.0);
        let h = project_all_ground(&evolve(&cfg));
        let minus = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let anti =
            target_w_state(2, &[minus, -minus], ElectronEncoding::Ladder { cut: 2 }).unwrap();
        assert!(conditional_fidelity(&h, &anti).unwrap() < 1e-12);
    }

    #[test]
    fn compression_roundtrip() {
        let ladder = symmetric_w_target(3, ElectronEncoding::Ladder { cut: 2 });
        let (q, leak) = compress_ket(&ladder, 2).unwrap();
        assert_eq!(leak, 0.0);
        let expected = symmetric_w_target(3, ElectronEncoding::Qubit);
        assert!((&q.amplitudes - &expected.amplitudes).camax() < 1e-15);
        let (rho, leak) = compress_density(&ladder.density(), 2).unwrap();
        assert!(leak < 1e-15);
        assert!((rho.expectation(&expected.amplitudes) - 1.0).abs() < 1e-14);
    }
}
