// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Finite-dimensional system models and their spectra.
//!
//! Fermion conventions: site `i` (1-based) is bit `i − 1` of the occupation
//! pattern, basis states are ordered by ascending integer value, and the
//! Jordan–Wigner string runs over all sites with a smaller index.

use crate::error::{OqsError, Result};
use crate::linalg::{self, real, CMatrix, I};

/// Largest chain handled by the dense bit-pattern basis.
pub const MAX_SITES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FermionBasis {
    sites: usize,
    particles: usize,
    states: Vec<u32>,
}

impl FermionBasis {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn index_of(&self, state: u32) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }

    /// Permutation matrix of the site reflection `i ↦ l + 1 − i`.
    pub fn reflection(&self) -> CMatrix {
        let dim = self.dim();
        let mut r = linalg::zeros(dim);
        for (k, &s) in self.states.iter().enumerate() {
            let mut mirrored = 0u32;
            for site in 0..self.sites {
                if s & (1 << site) != 0 {
                    mirrored |= 1 << (self.sites - 1 - site);
                }
            }
            let target = self
                .index_of(mirrored)
                .expect("reflection preserves the sector");
            r[(target, k)] = real(1.0);
        }
        r
    }

    fn tag(&self) -> String {
        format!("fermions(l={}, N={})", self.sites, self.particles)
    }
}

/// All occupation patterns of `particles` fermions on `sites` sites.
pub fn build_fermion_basis(sites: usize, particles: usize) -> Result<FermionBasis> {
    if sites == 0 || sites > MAX_SITES {
        return Err(OqsError::InvalidModel(format!(
            "number of sites must be in 1..={MAX_SITES}, got {sites}"
        )));
    }
    if particles > sites {
        return Err(OqsError::InvalidModel(format!(
            "{particles} particles do not fit on {sites} sites"
        )));
    }
    let states = (0u32..(1u32 << sites))
        .filter(|s| s.count_ones() as usize == particles)
        .collect();
    Ok(FermionBasis {
        sites,
        particles,
        states,
    })
}

/// `a†_to a_from` applied to an occupation pattern, with its Jordan–Wigner sign.
pub fn hop(state: u32, from: usize, to: usize) -> Option<(u32, f64)> {
    let from_bit = 1u32 << from;
    let to_bit = 1u32 << to;
    if state & from_bit == 0 {
        return None;
    }
    let removed = state & !from_bit;
    if from != to && removed & to_bit != 0 {
        return None;
    }
    let below = |s: u32, site: usize| (s & ((1u32 << site) - 1)).count_ones();
    let parity = below(state, from) + below(removed, to);
    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
    Some((removed | to_bit, sign))
}

/// A dense operator on a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyOperator {
    basis: String,
    matrix: CMatrix,
    hermitian: bool,
}

impl ManyBodyOperator {
    /// Wraps a matrix; a `hermitian` claim is verified to `1e−12` relative.
    pub fn new(basis: impl Into<String>, matrix: CMatrix, hermitian: bool) -> Result<Self> {
        if !matrix.is_square() {
            return Err(OqsError::ContractViolation(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if hermitian && !linalg::is_hermitian(&matrix, 1e-12) {
            return Err(OqsError::ContractViolation(format!(
                "operator flagged Hermitian has defect {:.3e}",
                linalg::hermiticity_defect(&matrix)
            )));
        }
        Ok(Self {
            basis: basis.into(),
            matrix,
            hermitian,
        })
    }

    /// Wraps a matrix, setting the Hermitian flag if it holds to `1e−12`.
    pub fn detect(basis: impl Into<String>, matrix: CMatrix) -> Self {
        let hermitian = linalg::is_hermitian(&matrix, 1e-12);
        Self {
            basis: basis.into(),
            matrix,
            hermitian,
        }
    }

    pub fn basis(&self) -> &str {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Extended Hubbard chain of spinless fermions with open boundaries:
/// `H = −J Σ (a†_i a_{i+1} + h.c.) + V Σ n_i n_{i+1}`.
pub fn build_hubbard(
    sites: usize,
    particles: usize,
    hopping: f64,
    interaction: f64,
) -> Result<ManyBodyOperator> {
    let basis = build_fermion_basis(sites, particles)?;
    Ok(hubbard_on(&basis, hopping, interaction))
}

pub fn hubbard_on(basis: &FermionBasis, hopping: f64, interaction: f64) -> ManyBodyOperator {
    let dim = basis.dim();
    let mut h = linalg::zeros(dim);
    for (col, &s) in basis.states().iter().enumerate() {
        for i in 0..basis.sites().saturating_sub(1) {
            let ni = (s >> i) & 1;
            let nj = (s >> (i + 1)) & 1;
            h[(col, col)] += real(interaction * (ni * nj) as f64);
            for (from, to) in [(i + 1, i), (i, i + 1)] {
                if let Some((t, sign)) = hop(s, from, to) {
                    let row = basis.index_of(t).expect("hopping conserves N");
                    h[(row, col)] += real(-hopping * sign);
                }
            }
        }
    }
    ManyBodyOperator {
        basis: basis.tag(),
        matrix: h,
        hermitian: true,
    }
}

/// Occupation `n_i` of site `i` (1-based).
pub fn number_operator(site: usize, basis: &FermionBasis) -> Result<ManyBodyOperator> {
    if site == 0 || site > basis.sites() {
        return Err(OqsError::InvalidModel(format!(
            "site {site} outside 1..={}",
            basis.sites()
        )));
    }
    let diag: Vec<f64> = basis
        .states()
        .iter()
        .map(|s| ((s >> (site - 1)) & 1) as f64)
        .collect();
    Ok(ManyBodyOperator {
        basis: basis.tag(),
        matrix: linalg::from_real_diagonal(&diag),
        hermitian: true,
    })
}

/// Harmonic oscillator truncated to the Fock levels `0..n_max`.
#[derive(Debug, Clone)]
pub struct OscillatorModel {
    pub mass: f64,
    pub omega: f64,
    pub n_max: usize,
    pub annihilation: CMatrix,
    pub creation: CMatrix,
    pub position: CMatrix,
    pub momentum: CMatrix,
}

impl OscillatorModel {
    fn tag(&self) -> String {
        format!("fock(n_max={})", self.n_max)
    }

    /// `H = Ω (a†a + 1/2)`.
    pub fn hamiltonian(&self) -> ManyBodyOperator {
        let diag: Vec<f64> = (0..self.n_max)
            .map(|n| self.omega * (n as f64 + 0.5))
            .collect();
        ManyBodyOperator {
            basis: self.tag(),
            matrix: linalg::from_real_diagonal(&diag),
            hermitian: true,
        }
    }

    /// Dimensionless coupling `(a + a†)/√2`.
    pub fn coupling(&self) -> ManyBodyOperator {
        let s = (&self.annihilation + &self.creation) * real(std::f64::consts::FRAC_1_SQRT_2);
        ManyBodyOperator {
            basis: self.tag(),
            matrix: s,
            hermitian: true,
        }
    }

    pub fn annihilation_operator(&self) -> ManyBodyOperator {
        ManyBodyOperator {
            basis: self.tag(),
            matrix: self.annihilation.clone(),
            hermitian: false,
        }
    }

    /// Number of Fock levels needed so that the thermal population of the
    /// highest kept level stays below `1e−8`.
    pub fn required_levels(omega: f64, temperature: f64) -> usize {
        let x = omega / temperature;
        let ln_ground = (-(-x).exp_m1()).ln();
        // p_n = (1 − e^{−x}) e^{−x n} < 1e−8  ⇔  n > (ln p_0 − ln 1e−8)/x
        let n_top = ((ln_ground - 1e-8f64.ln()) / x).floor() as usize + 1;
        n_top + 1
    }

    pub fn check_thermal_truncation(&self, temperature: f64) -> Result<()> {
        let required = Self::required_levels(self.omega, temperature);
        if self.n_max < required {
            return Err(OqsError::FockTruncation {
                n_max: self.n_max,
                required,
                temperature,
            });
        }
        Ok(())
    }
}

pub fn build_oscillator(mass: f64, omega: f64, n_max: usize) -> Result<OscillatorModel> {
    if n_max < 2 {
        return Err(OqsError::InvalidModel(format!(
            "oscillator needs at least 2 Fock levels, got {n_max}"
        )));
    }
    if !(mass > 0.0 && omega > 0.0) {
        return Err(OqsError::InvalidModel(
            "oscillator mass and frequency must be positive".into(),
        ));
    }
    let mut a = linalg::zeros(n_max);
    for n in 1..n_max {
        a[(n - 1, n)] = real((n as f64).sqrt());
    }
    let adag = a.adjoint();
    let q = (&a + &adag) * real((1.0 / (2.0 * mass * omega)).sqrt());
    let p = (&adag - &a) * (I * (mass * omega / 2.0).sqrt());
    Ok(OscillatorModel {
        mass,
        omega,
        n_max,
        annihilation: a,
        creation: adag,
        position: q,
        momentum: p,
    })
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian system Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectrumDecomposition {
    energies: Vec<f64>,
    unitary: CMatrix,
}

impl SpectrumDecomposition {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Bohr frequency `Δ_qk = ε_q − ε_k`.
    #[inline]
    pub fn splitting(&self, q: usize, k: usize) -> f64 {
        self.energies[q] - self.energies[k]
    }

    /// `U v`: eigenbasis column vector to the original basis.
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.unitary * m * self.unitary.adjoint()
    }

    pub fn to_eigenbasis_matrix(&self, m: &CMatrix) -> CMatrix {
        self.unitary.adjoint() * m * &self.unitary
    }
}

pub fn diagonalize(h: &ManyBodyOperator) -> Result<SpectrumDecomposition> {
    if !h.is_hermitian() {
        return Err(OqsError::ContractViolation(
            "diagonalize requires a Hermitian operator".into(),
        ));
    }
    let m = h.matrix();
    let dim = m.nrows();
    let (energies, unitary) = if linalg::is_diagonal(m) {
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
        let mut u = linalg::zeros(dim);
        for (col, &row) in order.iter().enumerate() {
            u[(row, col)] = real(1.0);
        }
        (order.iter().map(|&k| m[(k, k)].re).collect(), u)
    } else {
        linalg::hermitian_eigen(m)
    };
    let scale = linalg::max_abs(m).max(f64::MIN_POSITIVE);
    let residual = m * &unitary - &unitary * linalg::from_real_diagonal(&energies);
    if linalg::max_abs(&residual) > 1e-10 * scale {
        return Err(OqsError::NumericalDegeneracy(format!(
            "eigen residual {:.3e} exceeds tolerance",
            linalg::max_abs(&residual)
        )));
    }
    Ok(SpectrumDecomposition { energies, unitary })
}

/// `U† op U`.
pub fn to_eigenbasis(
    op: &ManyBodyOperator,
    spectrum: &SpectrumDecomposition,
) -> Result<ManyBodyOperator> {
    if op.dim() != spectrum.dim() {
        return Err(OqsError::DimensionMismatch {
            expected: spectrum.dim(),
            got: op.dim(),
        });
    }
    let m = spectrum.to_eigenbasis_matrix(op.matrix());
    let m = if op.is_hermitian() {
        linalg::hermitize(&m)
    } else {
        m
    };
    Ok(ManyBodyOperator {
        basis: format!("eigen[{}]", op.basis()),
        matrix: m,
        hermitian: op.is_hermitian(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frobenius, max_abs_diff, trace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(build_fermion_basis(8, 4).unwrap().dim(), 70);
        assert_eq!(build_fermion_basis(5, 2).unwrap().dim(), 10);
        let b = build_fermion_basis(2, 1).unwrap();
        assert_eq!(b.states(), &[0b01, 0b10]);
        for l in 1..=10 {
            for n in 0..=l {
                let b = build_fermion_basis(l, n).unwrap();
                assert_eq!(b.dim(), binomial(l, n));
                assert!(b.states().windows(2).all(|w| w[0] < w[1]));
                assert!(b.states().iter().all(|s| s.count_ones() as usize == n));
            }
        }
    }

    #[test]
    fn basis_rejects_bad_sizes() {
        assert!(matches!(
            build_fermion_basis(0, 0),
            Err(OqsError::InvalidModel(_))
        ));
        assert!(matches!(
            build_fermion_basis(3, 4),
            Err(OqsError::InvalidModel(_))
        ));
        assert!(build_fermion_basis(17, 1).is_err());
    }

    #[test]
    fn two_site_hubbard() {
        let h = build_hubbard(2, 1, 1.3, 0.7).unwrap();
        let m = h.matrix();
        assert_eq!(m[(0, 0)], real(0.0));
        assert_eq!(m[(0, 1)], real(-1.3));
        assert_eq!(m[(1, 0)], real(-1.3));
        let spec = diagonalize(&h).unwrap();
        assert!((spec.energies()[0] + 1.3).abs() < 1e-14);
        assert!((spec.energies()[1] - 1.3).abs() < 1e-14);
        let u = spec.unitary();
        assert!((u[(0, 0)].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn filled_chain_is_pure_interaction() {
        let h = build_hubbard(3, 3, 1.0, 0.8).unwrap();
        assert_eq!(h.dim(), 1);
        assert!((h.matrix()[(0, 0)] - real(1.6)).norm() < 1e-15);
    }

    #[test]
    fn number_operators() {
        let b = build_fermion_basis(2, 1).unwrap();
        let n1 = number_operator(1, &b).unwrap();
        // state 0b01 has site 1 occupied
        assert_eq!(n1.matrix()[(0, 0)], real(1.0));
        assert_eq!(n1.matrix()[(1, 1)], real(0.0));

        let b = build_fermion_basis(5, 2).unwrap();
        assert_eq!(trace(number_operator(1, &b).unwrap().matrix()), real(4.0));
        let total = (1..=5).fold(linalg::zeros(b.dim()), |acc, i| {
            acc + number_operator(i, &b).unwrap().matrix()
        });
        assert!(max_abs_diff(&total, &(linalg::identity(b.dim()) * real(2.0))) < 1e-15);
        assert!(number_operator(0, &b).is_err());
        assert!(number_operator(6, &b).is_err());
    }

    #[test]
    fn hubbard_conserves_particle_number_and_reflection() {
        let b = build_fermion_basis(6, 3).unwrap();
        let h = hubbard_on(&b, 1.0, 2.0);
        let r = b.reflection();
        let rhr = &r * h.matrix() * r.adjoint();
        assert!(max_abs_diff(&rhr, h.matrix()) < 1e-14);
        let n_tot = (1..=6).fold(linalg::zeros(b.dim()), |acc, i| {
            acc + number_operator(i, &b).unwrap().matrix()
        });
        assert!(linalg::max_abs(&linalg::commutator(h.matrix(), &n_tot)) < 1e-14);
    }

    #[test]
    fn hop_signs_follow_jordan_wigner() {
        // a†_2 a_0 on |0,1,2 occupied minus 2⟩ = 0b011: moves across site 1
        let (s, sign) = hop(0b011, 0, 2).unwrap();
        assert_eq!(s, 0b110);
        assert_eq!(sign, -1.0);
        assert!(hop(0b010, 0, 1).is_none());
        assert!(hop(0b011, 0, 1).is_none());
    }

    #[test]
    fn oscillator_algebra() {
        let osc = build_oscillator(1.7, 0.9, 12).unwrap();
        let q2 = &osc.position * &osc.position;
        assert!((q2[(0, 0)].re - 1.0 / (2.0 * 1.7 * 0.9)).abs() < 1e-14);
        let s = osc.coupling();
        for n in 0..11 {
            assert!((s.matrix()[(n, n + 1)].re - ((n as f64 + 1.0) / 2.0).sqrt()).abs() < 1e-14);
        }
        let comm = linalg::commutator(&osc.position, &osc.momentum);
        for n in 0..10 {
            assert!((comm[(n, n)] - c(0.0, 1.0)).norm() < 1e-12);
        }
        let aad = linalg::commutator(&osc.annihilation, &osc.creation);
        for n in 0..11 {
            assert!((aad[(n, n)] - real(1.0)).norm() < 1e-12);
        }
        assert!(linalg::is_hermitian(&osc.position, 1e-12));
        assert!(linalg::is_hermitian(&osc.momentum, 1e-12));
        let spec = diagonalize(&build_oscillator(1.0, 2.0, 10).unwrap().hamiltonian()).unwrap();
        for (n, e) in spec.energies().iter().enumerate() {
            assert!((e - 2.0 * (n as f64 + 0.5)).abs() < 1e-14);
        }
        assert!(build_oscillator(1.0, 1.0, 1).is_err());
    }

    #[test]
    fn fock_requirement() {
        let need = OscillatorModel::required_levels(1.0, 2.0);
        let x: f64 = 0.5;
        let p = |n: usize| (1.0 - (-x).exp()) * (-x * n as f64).exp();
        assert!(p(need - 1) < 1e-8);
        assert!(p(need - 2) >= 1e-8);
        let osc = build_oscillator(1.0, 1.0, 10).unwrap();
        assert!(matches!(
            osc.check_thermal_truncation(5.0),
            Err(OqsError::FockTruncation { .. })
        ));
    }

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let m = CMatrix::from_fn(dim, dim, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        linalg::hermitize(&m)
    }

    #[test]
    fn random_reconstruction_and_norm_preservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = ManyBodyOperator::new("random", random_hermitian(20, &mut rng), true).unwrap();
        let spec = diagonalize(&h).unwrap();
        let u = spec.unitary();
        assert!(max_abs_diff(&(u.adjoint() * u), &linalg::identity(20)) < 1e-10);
        assert!(
            max_abs_diff(
                &spec.from_eigenbasis(&linalg::from_real_diagonal(spec.energies())),
                h.matrix()
            ) < 1e-10
        );
        let diag = to_eigenbasis(&h, &spec).unwrap();
        assert!(max_abs_diff(diag.matrix(), &linalg::from_real_diagonal(spec.energies())) < 1e-10);

        let any = CMatrix::from_fn(20, 20, |_, _| c(rng.random(), rng.random()));
        let op = ManyBodyOperator::detect("random", any);
        let rotated = to_eigenbasis(&op, &spec).unwrap();
        assert!(
            (frobenius(rotated.matrix()) - frobenius(op.matrix())).abs()
                < 1e-12 * frobenius(op.matrix())
        );
        let id = ManyBodyOperator::new("id", linalg::identity(20), true).unwrap();
        assert!(
            max_abs_diff(
                to_eigenbasis(&id, &spec).unwrap().matrix(),
                &linalg::identity(20)
            ) < 1e-12
        );
    }

    #[test]
    fn errors() {
        let not_h = ManyBodyOperator::detect(
            "x",
            CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(0.0), real(0.0)]),
        );
        assert!(matches!(
            diagonalize(&not_h),
            Err(OqsError::ContractViolation(_))
        ));
        let spec = diagonalize(&build_hubbard(2, 1, 1.0, 0.0).unwrap()).unwrap();
        let big = ManyBodyOperator::new("id", linalg::identity(3), true).unwrap();
        assert!(matches!(
            to_eigenbasis(&big, &spec),
            Err(OqsError::DimensionMismatch { .. })
        ));
        assert!(ManyBodyOperator::new("x", not_h.matrix().clone(), true).is_err());
    }
}
