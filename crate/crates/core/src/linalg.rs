// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear-algebra helpers shared by every module.
//!
//! Matrices are column-major (`nalgebra` storage order). Vectorization of a
//! density matrix therefore stacks its columns: `vec(ρ)[i + j·dim] = ρ[i, j]`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

pub fn zeros_like(m: &CMatrix) -> CMatrix {
    CMatrix::zeros(m.nrows(), m.ncols())
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    frobenius_sq(m).sqrt()
}

/// Hilbert–Schmidt pairing `tr(A B†)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Largest element of `M − M†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max|M − M†| ≤ rel · max|M|` (with an absolute floor for the zero matrix).
pub fn is_hermitian(m: &CMatrix, rel: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= rel * max_abs(m).max(f64::MIN_POSITIVE)
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * real(0.5)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn from_real_diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    let mut m = zeros(n);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = real(v);
    }
    m
}

pub fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == ZERO))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// ascending order. Columns of the returned matrix are the eigenvectors.
///
/// Only the lower triangle is read; the caller is responsible for
/// Hermiticity.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .expect("unbounded symmetric eigen iteration always converges");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// `‖v‖²`.
pub fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨v| M |v⟩` for a Hermitian `M`.
pub fn expectation(m: &CMatrix, v: &CVector) -> f64 {
    let mv = m * v;
    v.iter()
        .zip(mv.iter())
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_eigen_sorts_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                real(2.0),
                c(0.0, 1.0),
                ZERO,
                c(0.0, -1.0),
                real(-1.0),
                real(0.5),
                ZERO,
                real(0.5),
                real(0.3),
            ],
        );
        let (vals, u) = hermitian_eigen(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let rebuilt = &u * from_real_diagonal(&vals) * u.adjoint();
        assert!(max_abs_diff(&rebuilt, &m) < 1e-12);
    }

    #[test]
    fn vectorization_stacks_columns() {
        let m = CMatrix::from_fn(2, 2, |i, j| real((i + 10 * j) as f64));
        let v = vectorize(&m);
        assert_eq!(v[1], real(1.0));
        assert_eq!(v[2], real(10.0));
        assert_eq!(unvectorize(&v, 2), m);
    }

    #[test]
    fn hs_inner_is_trace_of_a_bdag() {
        let a = CMatrix::from_fn(3, 3, |i, j| c(i as f64, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| c(1.0 + j as f64, (i * j) as f64));
        let direct = trace(&(&a * b.adjoint()));
        assert!((hs_inner(&a, &b) - direct).norm() < 1e-12);
    }
}
