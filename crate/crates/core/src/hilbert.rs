//! Composite Hilbert space of N electron sideband ladders and N two-level
//! systems: indexing, product states, partial trace and partial transpose.
//!
//! Subsystems are ordered (electron 1..N, TLS 1..N) and the first subsystem is
//! the most significant digit of the flat index, so `a ⊗ b` matches
//! `kronecker(a, b)`. Electron digits are `m + M`, TLS digits are `0 = g`,
//! `1 = e`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::hamiltonian::SystemConfig;
use crate::linalg;
use crate::{Error, Result, C64};

pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisDescriptor {
    arm_count: usize,
    sideband_cut: usize,
    subsystem_dims: Vec<usize>,
    strides: Vec<usize>,
    total_dim: usize,
}

/// One basis configuration: electron offsets and TLS excitations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Occupation {
    pub offsets: Vec<i64>,
    pub excited: Vec<bool>,
}

impl BasisDescriptor {
    pub fn new(arm_count: usize, sideband_cut: usize) -> Result<Self> {
        if arm_count == 0 {
            return Err(Error::InvalidBasis("arm count must be at least 1".into()));
        }
        if sideband_cut == 0 {
            return Err(Error::InvalidBasis(
                "sideband cut must be at least 1 (transfer needs offsets ±1)".into(),
            ));
        }
        let ladder = 2 * sideband_cut + 1;
        let mut subsystem_dims = vec![ladder; arm_count];
        subsystem_dims.extend(std::iter::repeat_n(2, arm_count));
        let strides = strides_for(&subsystem_dims);
        let total_dim = subsystem_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidBasis("total dimension overflows".into()))?;
        Ok(Self {
            arm_count,
            sideband_cut,
            subsystem_dims,
            strides,
            total_dim,
        })
    }

    pub fn arm_count(&self) -> usize {
        self.arm_count
    }

    pub fn sideband_cut(&self) -> usize {
        self.sideband_cut
    }

    pub fn ladder_dim(&self) -> usize {
        2 * self.sideband_cut + 1
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn electron_dim(&self) -> usize {
        self.total_dim >> self.arm_count
    }

    pub fn electron_subsystem(&self, arm: usize) -> usize {
        arm
    }

    pub fn tls_subsystem(&self, arm: usize) -> usize {
        self.arm_count + arm
    }

    pub fn digit(&self, index: usize, subsystem: usize) -> usize {
        (index / self.strides[subsystem]) % self.subsystem_dims[subsystem]
    }

    pub fn index_of(&self, occ: &Occupation) -> Result<usize> {
        if occ.offsets.len() != self.arm_count || occ.excited.len() != self.arm_count {
            return Err(Error::DimensionMismatch(format!(
                "occupation has {} offsets and {} TLS entries for {} arms",
                occ.offsets.len(),
                occ.excited.len(),
                self.arm_count
            )));
        }
        let cut = self.sideband_cut as i64;
        let mut index = 0;
        for (j, &m) in occ.offsets.iter().enumerate() {
            if m.abs() > cut {
                return Err(Error::OffsetOutOfRange {
                    offset: m,
                    cut: self.sideband_cut,
                });
            }
            index += (m + cut) as usize * self.strides[j];
        }
        for (j, &e) in occ.excited.iter().enumerate() {
            index += usize::from(e) * self.strides[self.arm_count + j];
        }
        Ok(index)
    }

    pub fn occupations_of(&self, index: usize) -> Occupation {
        let cut = self.sideband_cut as i64;
        let offsets = (0..self.arm_count)
            .map(|j| self.digit(index, j) as i64 - cut)
            .collect();
        let excited = (0..self.arm_count)
            .map(|j| self.digit(index, self.arm_count + j) == 1)
            .collect();
        Occupation { offsets, excited }
    }

    /// Index of the (electron, TLS) pair of `arm` inside its local space,
    /// `(m + M) * 2 + q`.
    pub fn arm_local_index(&self, index: usize, arm: usize) -> usize {
        self.digit(index, arm) * 2 + self.digit(index, self.arm_count + arm)
    }

    /// Flat-index offsets of every arm-local basis state, in arm-local order.
    pub fn arm_local_offsets(&self, arm: usize) -> Vec<usize> {
        let es = self.strides[arm];
        let ts = self.strides[self.arm_count + arm];
        (0..self.ladder_dim())
            .flat_map(|d| [d * es, d * es + ts])
            .collect()
    }

    /// Flat indices whose digits for `arm` (electron and TLS) are zero.
    pub fn arm_rest_indices(&self, arm: usize) -> Vec<usize> {
        (0..self.total_dim)
            .filter(|&i| self.digit(i, arm) == 0 && self.digit(i, self.arm_count + arm) == 0)
            .collect()
    }
}

pub fn build_basis(config: &SystemConfig) -> Result<BasisDescriptor> {
    BasisDescriptor::new(config.arm_count(), config.sideband_cut)
}

pub(crate) fn strides_for(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

/// Flat offsets contributed by every multi-index of `subset` (in the order of
/// `subset`, first entry most significant).
pub(crate) fn subset_offsets(dims: &[usize], strides: &[usize], subset: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for &s in subset {
        let mut next = Vec::with_capacity(offsets.len() * dims[s]);
        for &o in &offsets {
            for d in 0..dims[s] {
                next.push(o + d * strides[s]);
            }
        }
        offsets = next;
    }
    offsets
}

fn validate_keep(dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystem("keep set is empty".into()));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::InvalidSubsystem(format!(
            "duplicate entries in {keep:?}"
        )));
    }
    if let Some(&bad) = sorted.iter().find(|&&s| s >= dims.len()) {
        return Err(Error::InvalidSubsystem(format!(
            "subsystem {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    Ok(sorted)
}

/// Single-excitation atomic input `Σ_j c_j |g…e_j…g⟩ + c_0 |g…g⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicAmplitudes {
    pub excited: Vec<C64>,
    #[serde(default)]
    pub ground: C64,
}

impl AtomicAmplitudes {
    /// `e^{iφ_j}/√N`; all-zero phases give the symmetric W_N resource.
    pub fn phased_w(phases: &[f64]) -> Self {
        let norm = (phases.len() as f64).sqrt();
        Self {
            excited: phases
                .iter()
                .map(|&p| C64::from_polar(1.0 / norm, p))
                .collect(),
            ground: C64::new(0.0, 0.0),
        }
    }

    pub fn symmetric_w(n: usize) -> Self {
        Self::phased_w(&vec![0.0; n])
    }

    pub fn weighted(excited: Vec<C64>) -> Self {
        Self {
            excited,
            ground: C64::new(0.0, 0.0),
        }
    }

    /// `(cos θ, sin θ cos φ, sin θ sin φ)`.
    pub fn tripartite_angles(theta: f64, phi: f64) -> Self {
        Self::weighted(vec![
            C64::new(theta.cos(), 0.0),
            C64::new(theta.sin() * phi.cos(), 0.0),
            C64::new(theta.sin() * phi.sin(), 0.0),
        ])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.excited.iter().map(|c| c.norm_sqr()).sum::<f64>() + self.ground.norm_sqr()
    }

    pub fn validate(&self, arm_count: usize) -> Result<()> {
        if self.excited.len() != arm_count {
            return Err(Error::DimensionMismatch(format!(
                "{} atomic amplitudes for {arm_count} arms",
                self.excited.len()
            )));
        }
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(())
    }
}

/// A state vector over an arbitrary ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    pub dims: Vec<usize>,
    pub amplitudes: DVector<C64>,
}

impl Ket {
    pub fn new(dims: Vec<usize>, amplitudes: DVector<C64>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} imply {total} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn inner(&self, other: &Ket) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn normalized(&self) -> Ket {
        let n = self.amplitudes.norm();
        Ket {
            dims: self.dims.clone(),
            amplitudes: &self.amplitudes / C64::new(n, 0.0),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::from_psd(self.dims.clone(), m)
    }

    /// Reduced state on `keep` (ascending), normalized to unit trace.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = validate_keep(&self.dims, keep)?;
        let strides = strides_for(&self.dims);
        let rest: Vec<usize> = (0..self.dims.len()).filter(|s| !keep.contains(s)).collect();
        let kept = subset_offsets(&self.dims, &strides, &keep);
        let traced = subset_offsets(&self.dims, &strides, &rest);
        let psi = DMatrix::from_fn(kept.len(), traced.len(), |a, r| {
            self.amplitudes[kept[a] + traced[r]]
        });
        let dims = keep.iter().map(|&s| self.dims[s]).collect();
        Ok(DensityMatrix::from_psd(dims, &psi * psi.adjoint()))
    }
}

/// Pure state over the full electron + TLS basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub basis: BasisDescriptor,
    pub amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(basis: BasisDescriptor, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.total_dim()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn as_ket(&self) -> Ket {
        Ket {
            dims: self.basis.subsystem_dims().to_vec(),
            amplitudes: self.amplitudes.clone(),
        }
    }

    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.as_ket().reduced_density(keep)
    }

    /// Population in configurations where some electron sits on the ladder edge `|m| = M`.
    pub fn edge_population(&self) -> f64 {
        let b = &self.basis;
        let top = b.ladder_dim() - 1;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                (0..b.arm_count()).any(|j| {
                    let d = b.digit(*i, j);
                    d == 0 || d == top
                })
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Product of electron offsets with the atomic single-excitation superposition.
pub fn product_state(
    basis: &BasisDescriptor,
    electron_offsets: &[i64],
    atomic: &AtomicAmplitudes,
) -> Result<PureState> {
    let n = basis.arm_count();
    if electron_offsets.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} electron offsets for {n} arms",
            electron_offsets.len()
        )));
    }
    atomic.validate(n)?;
    let mut amplitudes = DVector::zeros(basis.total_dim());
    let mut occ = Occupation {
        offsets: electron_offsets.to_vec(),
        excited: vec![false; n],
    };
    let ground_index = basis.index_of(&occ)?;
    amplitudes[ground_index] += atomic.ground;
    for (j, &c) in atomic.excited.iter().enumerate() {
        occ.excited[j] = true;
        amplitudes[basis.index_of(&occ)?] += c;
        occ.excited[j] = false;
    }
    PureState::new(basis.clone(), amplitudes)
}

/// Hermitian, unit-trace, positive semidefinite matrix with its subsystem dims.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        check_square(&dims, &matrix)?;
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} is not 1")));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { dims, matrix })
    }

    /// Build from a matrix that is PSD by construction (a Gram matrix),
    /// symmetrizing and scaling to unit trace.
    pub(crate) fn from_psd(dims: Vec<usize>, matrix: DMatrix<C64>) -> Self {
        let mut m = linalg::hermitian_part(&matrix);
        let tr = m.trace().re;
        if tr > 0.0 {
            m /= C64::new(tr, 0.0);
        }
        Self { dims, matrix: m }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self {
            dims,
            matrix: DMatrix::identity(n, n) / C64::new(n as f64, 0.0),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn expectation(&self, ket: &DVector<C64>) -> f64 {
        (ket.adjoint() * &self.matrix * ket)[(0, 0)].re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            dims,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    /// Conjugation by a unitary, `U ρ U†`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> DensityMatrix {
        let m = u * &self.matrix * u.adjoint();
        DensityMatrix {
            dims: self.dims.clone(),
            matrix: linalg::hermitian_part(&m),
        }
    }
}

fn check_square(dims: &[usize], matrix: &DMatrix<C64>) -> Result<()> {
    let n: usize = dims.iter().product();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} need a {n}x{n} matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    Ok(())
}

/// Trace out every subsystem not listed in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    check_square(&rho.dims, &rho.matrix)?;
    let keep = validate_keep(&rho.dims, keep)?;
    let strides = strides_for(&rho.dims);
    let rest: Vec<usize> = (0..rho.dims.len()).filter(|s| !keep.contains(s)).collect();
    let kept = subset_offsets(&rho.dims, &strides, &keep);
    let traced = subset_offsets(&rho.dims, &strides, &rest);
    let out = DMatrix::from_fn(kept.len(), kept.len(), |a, b| {
        traced
            .iter()
            .map(|&r| rho.matrix[(kept[a] + r, kept[b] + r)])
            .sum::<C64>()
    });
    let dims = keep.iter().map(|&s| rho.dims[s]).collect();
    Ok(DensityMatrix { dims, matrix: out })
}

/// Partial transpose on one subsystem. The result is Hermitian but in general
/// not a density matrix, so it is returned as a bare matrix.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<DMatrix<C64>> {
    partial_transpose_matrix(&rho.dims, &rho.matrix, subsystem)
}

pub fn partial_transpose_matrix(
    dims: &[usize],
    m: &DMatrix<C64>,
    subsystem: usize,
) -> Result<DMatrix<C64>> {
    check_square(dims, m)?;
    if subsystem >= dims.len() {
        return Err(Error::InvalidSubsystem(format!(
            "subsystem {subsystem} out of range for {} subsystems",
            dims.len()
        )));
    }
    let stride = strides_for(dims)[subsystem];
    let d = dims[subsystem];
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let di = (i / stride) % d;
        for j in 0..n {
            let dj = (j / stride) % d;
            let ii = i - di * stride + dj * stride;
            let jj = j - dj * stride + di * stride;
            out[(ii, jj)] = m[(i, j)];
        }
    }
    Ok(out)
}
