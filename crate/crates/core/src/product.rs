//! Compact representation `Σ_k w_k ⊗_l f_{kl}` of states reachable from a
//! product electron state and a single-excitation atomic input.
//!
//! Arm-local propagators act factor by factor, so the number of terms stays at
//! `N + 1` and memory is linear in N. Observables that are products of
//! arm-local operators reduce to `Σ_{kk'} w̄_k w_{k'} Π_l ⟨f_{kl}|P_l|f_{k'l}⟩`.

use nalgebra::{DMatrix, DVector};

use crate::evolve::{arm_propagators, IntegratorSpec};
use crate::hamiltonian::{arm_local_dim, SystemConfig};
use crate::hilbert::{BasisDescriptor, PureState};
use crate::{Error, Result, C64};

/// Largest arm count for which `to_pure_state` will allocate a dense vector.
pub const DENSE_ARM_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSumState {
    cut: usize,
    weights: Vec<C64>,
    factors: Vec<Vec<DVector<C64>>>,
}

fn local_index(cut: usize, offset: i64, excited: bool) -> usize {
    ((offset + cut as i64) as usize) * 2 + usize::from(excited)
}

impl ProductSumState {
    /// All electrons at offset 0, atoms in `config.atomic`.
    pub fn initial(config: &SystemConfig) -> Result<Self> {
        let n = config.arm_count();
        config.atomic.validate(n)?;
        let cut = config.sideband_cut;
        let dim = arm_local_dim(cut);
        let unit = |excited: bool| {
            let mut v = DVector::zeros(dim);
            v[local_index(cut, 0, excited)] = C64::new(1.0, 0.0);
            v
        };
        let mut weights = vec![config.atomic.ground];
        let mut factors = vec![vec![unit(false); n]];
        for (j, &c) in config.atomic.excited.iter().enumerate() {
            weights.push(c);
            factors.push((0..n).map(|l| unit(l == j)).collect());
        }
        Ok(Self {
            cut,
            weights,
            factors,
        })
    }

    pub fn arm_count(&self) -> usize {
        self.factors[0].len()
    }

    pub fn sideband_cut(&self) -> usize {
        self.cut
    }

    pub fn apply(&self, locals: &[DMatrix<C64>]) -> Result<Self> {
        if locals.len() != self.arm_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} local operators for {} arms",
                locals.len(),
                self.arm_count()
            )));
        }
        let factors = self
            .factors
            .iter()
            .map(|term| term.iter().zip(locals).map(|(f, u)| u * f).collect())
            .collect();
        Ok(Self {
            cut: self.cut,
            weights: self.weights.clone(),
            factors,
        })
    }

    /// Evolve the initial state of `config` over `[0, T]`.
    pub fn evolve(config: &SystemConfig, spec: &IntegratorSpec) -> Result<Self> {
        config.validate()?;
        let props = arm_propagators(config, 0.0, config.window(), spec)?;
        Self::initial(config)?.apply(&props)
    }

    /// `Σ_{kk'} w̄_k w_{k'} Π_l ⟨f_{kl}| P_l |f_{k'l}⟩` for diagonal local
    /// projectors given as masks over the arm-local basis.
    fn diagonal_expectation<F>(&self, mask: F) -> f64
    where
        F: Fn(usize, usize) -> bool,
    {
        let n = self.arm_count();
        let dim = arm_local_dim(self.cut);
        let mut total = C64::new(0.0, 0.0);
        for (k, fk) in self.factors.iter().enumerate() {
            for (kp, fkp) in self.factors.iter().enumerate() {
                let w = self.weights[k].conj() * self.weights[kp];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut prod = w;
                for l in 0..n {
                    let overlap: C64 = (0..dim)
                        .filter(|&a| mask(l, a))
                        .map(|a| fk[l][a].conj() * fkp[l][a])
                        .sum();
                    prod *= overlap;
                }
                total += prod;
            }
        }
        total.re
    }

    pub fn norm_sqr(&self) -> f64 {
        self.diagonal_expectation(|_, _| true)
    }

    /// Probability of the TLS outcome `excited[l]` on every arm.
    pub fn outcome_probability(&self, excited: &[bool]) -> f64 {
        assert_eq!(excited.len(), self.arm_count(), "one outcome per arm");
        self.diagonal_expectation(|l, a| (a % 2 == 1) == excited[l])
    }

    pub fn herald_probability(&self) -> f64 {
        self.outcome_probability(&vec![false; self.arm_count()])
    }

    /// Population with some electron at the truncation edge `|m| = M`.
    pub fn edge_population(&self) -> f64 {
        let top = 2 * self.cut;
        let inner = self.diagonal_expectation(|_, a| {
            let d = a / 2;
            d != 0 && d != top
        });
        (self.norm_sqr() - inner).max(0.0)
    }

    /// Amplitude of a single configuration.
    pub fn amplitude(&self, offsets: &[i64], excited: &[bool]) -> C64 {
        let idx: Vec<usize> = offsets
            .iter()
            .zip(excited)
            .map(|(&m, &q)| local_index(self.cut, m, q))
            .collect();
        self.weights
            .iter()
            .zip(&self.factors)
            .map(|(w, term)| term.iter().zip(&idx).fold(*w, |acc, (f, &i)| acc * f[i]))
            .sum()
    }

    /// Heralded amplitudes on `|E_j^{(+)}⟩ ⊗ |g…g⟩`, `j = 1..N`.
    pub fn upper_branch_amplitudes(&self) -> Vec<C64> {
        let n = self.arm_count();
        let ground = vec![false; n];
        (0..n)
            .map(|j| {
                let mut offsets = vec![0i64; n];
                offsets[j] = 1;
                self.amplitude(&offsets, &ground)
            })
            .collect()
    }

    /// Dense expansion over the full basis.
    pub fn to_pure_state(&self) -> Result<PureState> {
        let n = self.arm_count();
        if n > DENSE_ARM_LIMIT {
            return Err(Error::TooLarge(n));
        }
        let basis = BasisDescriptor::new(n, self.cut)?;
        let mut amps = DVector::zeros(basis.total_dim());
        for (w, term) in self.weights.iter().zip(&self.factors) {
            let mut partial = DVector::from_element(1, *w);
            // Arm-major Kronecker product, scattered below into the
            // (electrons, TLS) ordering.
            for f in term {
                let mut next = DVector::zeros(partial.len() * f.len());
                for (i, p) in partial.iter().enumerate() {
                    for (a, v) in f.iter().enumerate() {
                        next[i * f.len() + a] = p * v;
                    }
                }
                partial = next;
            }
            let dim = arm_local_dim(self.cut);
            for (flat, v) in partial.iter().enumerate() {
                if *v == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut rem = flat;
                let mut index = 0;
                for l in (0..n).rev() {
                    let a = rem % dim;
                    rem /= dim;
                    index += basis.strides()[basis.electron_subsystem(l)] * (a / 2)
                        + basis.strides()[basis.tls_subsystem(l)] * (a % 2);
                }
                amps[index] += v;
            }
        }
        PureState::new(basis, amps)
    }
}
