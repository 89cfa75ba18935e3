//! Negativity, pairwise negativity reports, von Neumann entropy, the W-state
//! witness and the success-weighted yield.

use serde::{Deserialize, Serialize};

use crate::herald::compress_density;
use crate::hilbert::{partial_trace, partial_transpose, DensityMatrix, Ket};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect};
use crate::{Error, Result};

/// Largest out-of-manifold weight accepted when compressing to `{0, +}`.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// Eigenvalues below this are dropped from entropies.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

/// `(‖ρ^{Γ}‖₁ − 1)/2` with the transpose taken on `transpose_on`.
pub fn negativity(rho: &DensityMatrix, transpose_on: usize) -> Result<f64> {
    let defect = hermiticity_defect(rho.matrix());
    if defect > crate::hilbert::HERMITIAN_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian (defect {defect:e})"
        )));
    }
    let pt = partial_transpose(rho, transpose_on)?;
    let negative: f64 = hermitian_eigenvalues(&pt)
        .into_iter()
        .filter(|&l| l < -f64::EPSILON)
        .map(|l| -l)
        .sum();
    Ok(negative)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairNegativityReport {
    /// `((a, b), N_ab)` for every unordered pair, `a < b`, in lexicographic order.
    pub pairs: Vec<((usize, usize), f64)>,
    pub average: f64,
    /// Weight discarded by the `{0, +}` compression (0 when not compressed).
    pub leakage: f64,
}

impl PairNegativityReport {
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.pairs.iter().find(|(p, _)| *p == key).map(|(_, v)| *v)
    }

    fn from_pairs(pairs: Vec<((usize, usize), f64)>, leakage: f64) -> Self {
        let average = pairs.iter().map(|(_, v)| v).sum::<f64>() / pairs.len() as f64;
        Self {
            pairs,
            average,
            leakage,
        }
    }
}

fn pair_list(parties: usize) -> Result<Vec<(usize, usize)>> {
    if parties < 2 {
        return Err(Error::InvalidSubsystem(
            "pairwise negativity needs at least two parties".into(),
        ));
    }
    Ok((0..parties)
        .flat_map(|a| (a + 1..parties).map(move |b| (a, b)))
        .collect())
}

/// Pairwise negativities of an N-party density matrix. With `compress_cut =
/// Some(M)` every ladder is first restricted to offsets `{0, +1}`; leakage above
/// [`LEAKAGE_LIMIT`] is an error.
pub fn pairwise_negativity_report(
    rho: &DensityMatrix,
    compress_cut: Option<usize>,
) -> Result<PairNegativityReport> {
    let (rho, leakage) = match compress_cut {
        Some(cut) => {
            let (r, leak) = compress_density(rho, cut)?;
            if leak > LEAKAGE_LIMIT {
                return Err(Error::OutOfManifold(leak));
            }
            (r, leak)
        }
        None => (rho.clone(), 0.0),
    };
    let mut pairs = Vec::new();
    for (a, b) in pair_list(rho.dims().len())? {
        let reduced = partial_trace(&rho, &[a, b])?;
        pairs.push(((a, b), negativity(&reduced, 1)?));
    }
    Ok(PairNegativityReport::from_pairs(pairs, leakage))
}

/// Pairwise negativities among the subsystems `parties` of a pure state, each
/// pair reduced directly from the ket. Pair labels are positions in `parties`.
pub fn pairwise_negativity_from_ket(ket: &Ket, parties: &[usize]) -> Result<PairNegativityReport> {
    let mut pairs = Vec::new();
    for (a, b) in pair_list(parties.len())? {
        let reduced = ket.reduced_density(&[parties[a], parties[b]])?;
        pairs.push(((a, b), negativity(&reduced, 1)?));
    }
    Ok(PairNegativityReport::from_pairs(pairs, 0.0))
}

/// `−Tr ρ log₂ ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    hermitian_eigenvalues(rho.matrix())
        .into_iter()
        .filter(|&l| l > ENTROPY_CUTOFF)
        .map(|l| -l * l.log2())
        .sum()
}

/// `(N−1)/N − ⟨target|ρ|target⟩` for an N-party target.
pub fn witness_expectation(rho: &DensityMatrix, target: &Ket) -> Result<f64> {
    if rho.dims() != target.dims.as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "state dims {:?} vs target dims {:?}",
            rho.dims(),
            target.dims
        )));
    }
    let n = target.dims.len() as f64;
    Ok((n - 1.0) / n - rho.expectation(&target.amplitudes))
}

pub fn success_weighted_yield(probability: f64, conditional_average_negativity: f64) -> f64 {
    probability * conditional_average_negativity
}
