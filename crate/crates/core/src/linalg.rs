//! Small dense helpers on complex matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::C64;

/// Largest entrywise modulus of `m - m†`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// `exp(-i K)` for Hermitian `K`, through its eigendecomposition.
pub fn expm_minus_i(k: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(hermitian_part(k));
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| C64::new(0.0, -l).exp()),
    );
    let mut scaled = v.clone();
    for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *p;
    }
    scaled * v.adjoint()
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}
