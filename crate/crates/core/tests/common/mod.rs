// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

pub mod drude;

use std::sync::Arc;

use num_complex::Complex64;
use oqs_core::bath::BathSpec;
use oqs_core::dissipators::BathChannel;
use oqs_core::models::{
    build_fermion_basis, diagonalize, hubbard_on, number_operator, FermionBasis,
    SpectrumDecomposition,
};
use oqs_core::CMatrix;
use rand::Rng;

pub fn hubbard(l: usize, n: usize, v: f64) -> (FermionBasis, SpectrumDecomposition) {
    let basis = build_fermion_basis(l, n).unwrap();
    let spec = diagonalize(&hubbard_on(&basis, 1.0, v)).unwrap();
    (basis, spec)
}

/// Single bath on `n̂_site`.
pub fn local_channel(
    basis: &FermionBasis,
    spec: &SpectrumDecomposition,
    site: usize,
    bath: BathSpec,
) -> BathChannel {
    let n = number_operator(site, basis).unwrap();
    BathChannel::from_operator(
        &n,
        spec,
        Arc::new(bath.correlation().unwrap()),
        format!("n{site}"),
    )
    .unwrap()
}

pub fn random_complex<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let a = random_complex(rng, dim);
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let a = random_complex(rng, dim);
    let p = &a * a.adjoint();
    let tr = p.trace();
    p / tr
}

/// `∫_a^b f` by double-exponential quadrature on panels of width `panel`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panel: f64, tol: f64) -> f64 {
    let n = ((b - a) / panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|k| {
            let lo = a + k as f64 * h;
            quadrature::integrate(&f, lo, lo + h, tol / n as f64).integral
        })
        .sum()
}

pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).camax() / a.camax().max(b.camax()).max(f64::MIN_POSITIVE)
}
