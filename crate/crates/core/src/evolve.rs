// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Density-matrix propagation, steady states, error measures and
//! observables. All matrices live in the energy eigenbasis of `H_S`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::dissipators::{superoperator, MasterEquation};
use crate::error::{OqsError, Result};
use crate::exec::Execution;
use crate::linalg::{self, CMatrix, CVector, ONE};
use crate::models::{number_operator, FermionBasis, SpectrumDecomposition};
use crate::ode::{integrate, OdeOptions};

/// Negative eigenvalues below this flag a state as unphysical.
pub const NEGATIVITY_THRESHOLD: f64 = -1e-10;
/// Largest Liouvillian dimension for which uniqueness is checked by SVD.
const SVD_LIMIT: usize = 400;
/// Largest Liouvillian dimension for the dense LU solve.
pub const DENSE_LIMIT: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity and unit trace to 1e−10. Positivity is not required.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(OqsError::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > 1e-10 {
            return Err(OqsError::ContractViolation(format!(
                "density matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr - ONE).norm() > 1e-10 {
            return Err(OqsError::ContractViolation(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = linalg::norm_sqr(psi);
        if (n - 1.0).abs() > 1e-10 {
            return Err(OqsError::ContractViolation(format!(
                "state vector norm² is {n}, expected 1"
            )));
        }
        Self::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim) / linalg::real(dim as f64),
        }
    }

    /// `e^{−βH_S}/Z` in the eigenbasis.
    pub fn gibbs(spectrum: &SpectrumDecomposition, beta: f64) -> Self {
        let e0 = spectrum.energies()[0];
        let w: Vec<f64> = spectrum
            .energies()
            .iter()
            .map(|e| (-beta * (e - e0)).exp())
            .collect();
        let z: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / z).collect();
        Self {
            matrix: linalg::from_real_diagonal(&p),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= NEGATIVITY_THRESHOLD
    }
}

/// Named initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    GroundState,
    /// `(|g⟩ + |e⟩)/√2` with the first excited state `|e⟩`.
    GroundExcitedSuperposition,
}

impl InitialState {
    pub fn vector(&self, dim: usize) -> CVector {
        let mut v = CVector::zeros(dim);
        match self {
            InitialState::GroundState => v[0] = ONE,
            InitialState::GroundExcitedSuperposition => {
                let a = linalg::real(std::f64::consts::FRAC_1_SQRT_2);
                v[0] = a;
                v[1] = a;
            }
        }
        v
    }

    pub fn density(&self, dim: usize) -> DensityMatrix {
        DensityMatrix::pure(&self.vector(dim)).expect("normalized by construction")
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRecord {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub metadata: BTreeMap<String, String>,
    /// Largest `|tr ρ(t) − 1|` along the run.
    pub max_trace_drift: f64,
}

impl SimulationRecord {
    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn distances(&self, other: &SimulationRecord) -> Result<Vec<f64>> {
        if self.times != other.times {
            return Err(OqsError::InvalidParameter(
                "records are on different time grids".into(),
            ));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| trace_distance(a, b))
            .collect())
    }
}

/// Integrates `dρ/dt = L_t[ρ]` and stores `ρ` on `grid` (strictly increasing,
/// starting at `0`). Time-dependent generators see absolute time.
pub fn propagate(
    gen: &dyn MasterEquation,
    rho0: &DensityMatrix,
    grid: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<SimulationRecord> {
    if rho0.dim() != gen.dim() {
        return Err(OqsError::DimensionMismatch {
            expected: gen.dim(),
            got: rho0.dim(),
        });
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(OqsError::InvalidParameter(
            "time grid must be nonempty, nonnegative and strictly increasing".into(),
        ));
    }
    let states = integrate(
        |t, rho| gen.apply(t, rho),
        0.0,
        rho0.matrix().clone(),
        grid,
        OdeOptions::with_tolerances(rtol, atol),
    )?;
    let max_trace_drift = states
        .iter()
        .map(|s| (linalg::trace(s) - ONE).norm())
        .fold(0.0, f64::max);
    Ok(SimulationRecord {
        times: grid.to_vec(),
        states,
        metadata: BTreeMap::new(),
        max_trace_drift,
    })
}

/// Uniform grid `0, dt, …, t_max` (the endpoint is always included).
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: CMatrix,
    pub min_eigenvalue: f64,
    /// Minimum eigenvalue below [`NEGATIVITY_THRESHOLD`].
    pub negative: bool,
    /// `‖L vec(ρ)‖_∞ / ‖L‖_∞`.
    pub relative_residual: f64,
}

/// Kernel of a stationary generator, normalized to unit trace.
pub fn steady_state(gen: &dyn MasterEquation, exec: Execution) -> Result<SteadyState> {
    let dim = gen.dim();
    let n = dim * dim;
    if n > DENSE_LIMIT {
        return Err(OqsError::InvalidParameter(format!(
            "Liouvillian dimension {n} exceeds the dense limit {DENSE_LIMIT}"
        )));
    }
    let l = superoperator(gen, f64::INFINITY, exec);
    let l_norm = infinity_norm(&l);
    if l_norm == 0.0 {
        return Err(OqsError::DegenerateSteadyState("generator vanishes".into()));
    }

    let solve = |row: usize| -> Result<CMatrix> {
        let mut a = l.clone();
        for j in 0..n {
            a[(row, j)] = linalg::ZERO;
        }
        for i in 0..dim {
            a[(row, i * dim + i)] = ONE;
        }
        let mut b = CVector::zeros(n);
        b[row] = ONE;
        let x = a.lu().solve(&b).ok_or_else(|| {
            OqsError::DegenerateSteadyState("constrained Liouvillian is singular".into())
        })?;
        Ok(linalg::hermitize(&linalg::unvectorize(&x, dim)))
    };

    let rho = solve(0)?;
    if n <= SVD_LIMIT {
        let mut sv: Vec<f64> = l.clone().singular_values().iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        let norm2 = sv.last().copied().unwrap_or(0.0);
        if n > 1 && sv[1] <= 1e-8 * norm2 {
            return Err(OqsError::DegenerateSteadyState(format!(
                "second-smallest singular value {:.3e} (norm {norm2:.3e})",
                sv[1]
            )));
        }
    } else if dim > 1 {
        let other = solve(n - 1)?;
        let diff = linalg::max_abs_diff(&rho, &other);
        if diff > 1e-8 {
            return Err(OqsError::DegenerateSteadyState(format!(
                "solutions from different constraint rows differ by {diff:.3e}"
            )));
        }
    }
    let residual = &l * linalg::vectorize(&rho);
    let relative_residual = residual.iter().map(|z| z.norm()).fold(0.0, f64::max) / l_norm;
    let min_eigenvalue = linalg::hermitian_eigenvalues(&rho)[0];
    Ok(SteadyState {
        rho,
        min_eigenvalue,
        negative: min_eigenvalue < NEGATIVITY_THRESHOLD,
        relative_residual,
    })
}

fn infinity_norm(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `½ Σ |eig(ρ₁ − ρ₂)|`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = linalg::hermitize(&(a - b));
    0.5 * linalg::hermitian_eigenvalues(&d)
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

/// `(1/τ) ∫_0^τ d(t) dt` by the trapezoid rule on the common grid.
pub fn time_averaged_distance(a: &SimulationRecord, b: &SimulationRecord, tau: f64) -> Result<f64> {
    let d = a.distances(b)?;
    average_over(&a.times, &d, tau)
}

/// Trapezoidal average of sampled values over `[times[0], tau]`.
pub fn average_over(times: &[f64], values: &[f64], tau: f64) -> Result<f64> {
    let last = *times
        .last()
        .ok_or_else(|| OqsError::InvalidParameter("empty grid".into()))?;
    if !(tau > times[0]) || last < tau * (1.0 - 1e-12) {
        return Err(OqsError::InvalidParameter(format!(
            "time grid ends at {last}, shorter than the averaging window {tau}"
        )));
    }
    let mut integral = 0.0;
    for k in 1..times.len() {
        let (t0, t1) = (times[k - 1], times[k]);
        if t0 >= tau {
            break;
        }
        let (v0, v1) = (values[k - 1], values[k]);
        if t1 <= tau {
            integral += 0.5 * (t1 - t0) * (v0 + v1);
        } else {
            let vt = v0 + (v1 - v0) * (tau - t0) / (t1 - t0);
            integral += 0.5 * (tau - t0) * (v0 + vt);
        }
    }
    Ok(integral / (tau - times[0]))
}

/// Site occupation operators of a chain in the energy eigenbasis.
#[derive(Debug, Clone)]
pub struct ChainObservables {
    sites: usize,
    numbers: Vec<CMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub occupations: Vec<f64>,
    pub n_left: f64,
    pub n_right: f64,
    /// `N_L − N_R`.
    pub imbalance: f64,
    pub populations: Vec<f64>,
    pub max_coherence: f64,
}

impl ChainObservables {
    pub fn new(basis: &FermionBasis, spectrum: &SpectrumDecomposition) -> Result<Self> {
        let numbers = (1..=basis.sites())
            .map(|i| {
                let n = number_operator(i, basis)?;
                Ok(spectrum.to_eigenbasis_matrix(n.matrix()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sites: basis.sites(),
            numbers,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `n̂_i` (1-based) in the eigenbasis.
    pub fn number(&self, site: usize) -> &CMatrix {
        &self.numbers[site - 1]
    }

    /// Left half: sites `1..=⌊l/2⌋`; right half: `⌈l/2⌉+1..=l`. For odd `l`
    /// the middle site belongs to neither.
    pub fn halves(&self) -> (Vec<usize>, Vec<usize>) {
        let l = self.sites;
        let left = (1..=l / 2).collect();
        let right = (l.div_ceil(2) + 1..=l).collect();
        (left, right)
    }

    pub fn imbalance_operator(&self) -> CMatrix {
        let (left, right) = self.halves();
        let mut m = linalg::zeros(self.numbers[0].nrows());
        for i in left {
            m += self.number(i);
        }
        for i in right {
            m -= self.number(i);
        }
        m
    }

    pub fn evaluate(&self, rho: &CMatrix) -> Observables {
        let occupations: Vec<f64> = self
            .numbers
            .iter()
            .map(|n| linalg::trace(&(n * rho)).re)
            .collect();
        let (left, right) = self.halves();
        let n_left: f64 = left.iter().map(|&i| occupations[i - 1]).sum();
        let n_right: f64 = right.iter().map(|&i| occupations[i - 1]).sum();
        let dim = rho.nrows();
        let populations = (0..dim).map(|i| rho[(i, i)].re).collect();
        let mut max_coherence = 0.0f64;
        for j in 0..dim {
            for i in 0..dim {
                if i != j {
                    max_coherence = max_coherence.max(rho[(i, j)].norm());
                }
            }
        }
        Observables {
            occupations,
            n_left,
            n_right,
            imbalance: n_left - n_right,
            populations,
            max_coherence,
        }
    }
}

/// `tr(O ρ)` for a Hermitian observable.
pub fn expectation(op: &CMatrix, rho: &CMatrix) -> f64 {
    let z: Complex64 = linalg::trace(&(op * rho));
    z.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{correlation_exp_sum, g_inf, DrudeSpectralDensity};
    use crate::dissipators::{
        rwa_generator, truncated_generator, BathChannel, LindbladGenerator, RedfieldGenerator,
    };
    use crate::linalg::{c, ZERO};
    use crate::models::{build_fermion_basis, build_hubbard, diagonalize, ManyBodyOperator};
    use std::sync::Arc;

    #[test]
    fn trace_distance_examples() {
        let a = linalg::from_real_diagonal(&[0.7, 0.3]);
        let b = linalg::from_real_diagonal(&[0.3, 0.7]);
        assert!((trace_distance(&a, &b) - 0.4).abs() < 1e-14);
        assert_eq!(trace_distance(&a, &a), 0.0);
        let p = linalg::from_real_diagonal(&[1.0, 0.0]);
        let q = linalg::from_real_diagonal(&[0.0, 1.0]);
        assert!((trace_distance(&p, &q) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn averaging() {
        let t = vec![0.0, 0.5, 1.0, 2.0];
        assert!((average_over(&t, &[0.3; 4], 1.5).unwrap() - 0.3).abs() < 1e-15);
        // linear ramp d = t averaged over [0, 2] is 1
        assert!((average_over(&t, &t, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(average_over(&t, &t, 3.0).is_err());
    }

    #[test]
    fn halves_and_mixed_state() {
        let basis = build_fermion_basis(2, 1).unwrap();
        let h = build_hubbard(2, 1, 1.0, 0.0).unwrap();
        let spec = diagonalize(&h).unwrap();
        let obs = ChainObservables::new(&basis, &spec).unwrap();
        let r = obs.evaluate(DensityMatrix::maximally_mixed(2).matrix());
        assert!((r.occupations[0] - 0.5).abs() < 1e-14);
        let basis5 = build_fermion_basis(5, 2).unwrap();
        let spec5 = diagonalize(&build_hubbard(5, 2, 1.0, 2.0).unwrap()).unwrap();
        let o5 = ChainObservables::new(&basis5, &spec5).unwrap();
        assert_eq!(o5.halves(), (vec![1, 2], vec![4, 5]));
        let basis4 = build_fermion_basis(4, 2).unwrap();
        let spec4 = diagonalize(&build_hubbard(4, 2, 1.0, 2.0).unwrap()).unwrap();
        let o4 = ChainObservables::new(&basis4, &spec4).unwrap();
        assert_eq!(o4.halves(), (vec![1, 2], vec![3, 4]));
        let g = o5.evaluate(DensityMatrix::gibbs(&spec5, 0.4).matrix());
        assert!(g.imbalance.abs() < 1e-10);
        assert!((g.occupations.iter().sum::<f64>() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn unitary_evolution_keeps_populations() {
        let spec = diagonalize(&build_hubbard(4, 2, 1.0, 2.0).unwrap()).unwrap();
        let gen =
            LindbladGenerator::new(linalg::from_real_diagonal(spec.energies()), vec![]).unwrap();
        let rho0 = InitialState::GroundExcitedSuperposition.density(spec.dim());
        let rec = propagate(&gen, &rho0, &uniform_grid(5.0, 11), 1e-10, 1e-12).unwrap();
        for s in &rec.states {
            for i in 0..spec.dim() {
                assert!((s[(i, i)] - rho0.matrix()[(i, i)]).norm() < 1e-10);
            }
        }
        let w = spec.energies()[1] - spec.energies()[0];
        let last = rec.states.last().unwrap();
        assert!((last[(0, 1)] - c(0.0, w * 5.0).exp() * 0.5).norm() < 1e-8);
    }

    #[test]
    fn two_level_relaxation() {
        let h =
            ManyBodyOperator::new("tls", linalg::from_real_diagonal(&[-0.5, 0.5]), true).unwrap();
        let spec = diagonalize(&h).unwrap();
        let sx = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let beta = 0.8;
        let j = DrudeSpectralDensity::new(0.05, 17.0).unwrap();
        let bath = correlation_exp_sum(j, beta, 1e-6).unwrap();
        let ch = BathChannel::new(sx, Arc::new(bath), "b").unwrap();
        let gen = rwa_generator(std::slice::from_ref(&ch), &spec, f64::INFINITY).unwrap();
        let (gd, gu) = (g_inf(-1.0, &j, beta), g_inf(1.0, &j, beta));
        let rate = 2.0 * (gd + gu);
        let p_inf = gd / (gd + gu);
        let rho0 = InitialState::GroundState.density(2);
        let grid = uniform_grid(30.0, 31);
        let rec = propagate(&gen, &rho0, &grid, 1e-10, 1e-12).unwrap();
        for (t, s) in grid.iter().zip(&rec.states) {
            let p = p_inf + (1.0 - p_inf) * (-rate * t).exp();
            assert!((s[(0, 0)].re - p).abs() < 1e-6);
        }
    }

    #[test]
    fn steady_states() {
        let h = build_hubbard(4, 2, 1.0, 2.0).unwrap();
        let spec = diagonalize(&h).unwrap();
        let basis = build_fermion_basis(4, 2).unwrap();
        let n1 = number_operator(1, &basis).unwrap();
        let beta = 0.5;
        let bath =
            correlation_exp_sum(DrudeSpectralDensity::new(0.1, 17.0).unwrap(), beta, 1e-6).unwrap();
        let ch = BathChannel::from_operator(&n1, &spec, Arc::new(bath), "b").unwrap();
        let rwa = rwa_generator(std::slice::from_ref(&ch), &spec, f64::INFINITY).unwrap();
        let ss = steady_state(&rwa, Execution::Sequential).unwrap();
        let gibbs = DensityMatrix::gibbs(&spec, beta);
        assert!(trace_distance(&ss.rho, gibbs.matrix()) < 1e-8);
        assert!(ss.relative_residual < 1e-10);
        let tr = truncated_generator(std::slice::from_ref(&ch), &spec, f64::INFINITY).unwrap();
        let st = steady_state(&tr, Execution::Sequential).unwrap();
        assert!(st.min_eigenvalue >= -1e-12);
        // fixed point of the propagation
        let rec = propagate(
            &tr,
            &DensityMatrix::new(st.rho.clone()).unwrap(),
            &[0.0, 10.0],
            1e-10,
            1e-13,
        )
        .unwrap();
        assert!(trace_distance(&rec.states[1], &st.rho) < 1e-8);
        let red = RedfieldGenerator::new(&[ch], &spec, f64::INFINITY).unwrap();
        assert!(steady_state(&red, Execution::Sequential).is_ok());
    }

    #[test]
    fn degenerate_kernel_is_rejected() {
        let gen =
            LindbladGenerator::new(linalg::from_real_diagonal(&[0.0, 1.0, 3.0]), vec![]).unwrap();
        assert!(matches!(
            steady_state(&gen, Execution::Sequential),
            Err(OqsError::DegenerateSteadyState(_))
        ));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(linalg::from_real_diagonal(&[0.5, 0.6])).is_err());
        let mut m = linalg::from_real_diagonal(&[0.5, 0.5]);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        let neg = DensityMatrix::new(linalg::from_real_diagonal(&[1.2, -0.2])).unwrap();
        assert!(!neg.is_physical());
    }
}
