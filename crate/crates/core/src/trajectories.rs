// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo wave-function unraveling of a Lindblad generator.
//!
//! Between jumps `ψ` follows `dψ/dt = −i H_eff ψ` with
//! `H_eff = H_coh − (i/2) Σ_α A_α†A_α` and loses norm. A jump happens when
//! `‖ψ‖²` falls below a uniform random threshold; the crossing is located by
//! bisection on the integrator's dense output.
//!
//! Trajectory `k` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `k`,
//! and results are reduced in trajectory order, so estimates are bit-identical
//! for any number of workers.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bath::BathSpec;
use crate::dissipators::{truncated_generator, BathChannel, LindbladGenerator};
use crate::error::{OqsError, Result};
use crate::evolve::{ChainObservables, InitialState};
use crate::exec::Execution;
use crate::linalg::{self, CMatrix, CVector, I};
use crate::models::{build_fermion_basis, diagonalize, hubbard_on, number_operator};
use crate::ode::{Dopri5, OdeOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub t_max: f64,
    pub burn_in: f64,
    pub sample_dt: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Relative precision of the jump time.
    pub jump_tol: f64,
}

impl TrajectoryConfig {
    /// Burn-in of `5/γ` followed by an averaging window of the same length.
    pub fn for_coupling(gamma: f64, n_traj: usize, seed: u64) -> Self {
        let burn_in = 5.0 / gamma;
        Self {
            n_traj,
            seed,
            t_max: 2.0 * burn_in,
            burn_in,
            sample_dt: 0.1,
            rtol: 1e-7,
            atol: 1e-9,
            jump_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(OqsError::InvalidParameter(
                "n_traj must be at least 1".into(),
            ));
        }
        if !(self.burn_in >= 0.0 && self.burn_in < self.t_max) {
            return Err(OqsError::InvalidParameter(format!(
                "burn_in ({}) must lie in [0, t_max = {})",
                self.burn_in, self.t_max
            )));
        }
        if !(self.sample_dt > 0.0) {
            return Err(OqsError::InvalidParameter(
                "sample_dt must be positive".into(),
            ));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.jump_tol > 0.0) {
            return Err(OqsError::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    fn sample_times(&self) -> Vec<f64> {
        let n = ((self.t_max - self.burn_in) / self.sample_dt + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| self.burn_in + k as f64 * self.sample_dt)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    pub observables: Vec<String>,
    pub means: Vec<f64>,
    /// Standard deviation of the trajectory means over `√n_traj`.
    pub stderrs: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
    /// Per-trajectory time averages, in trajectory order.
    pub samples: Vec<Vec<f64>>,
    pub total_jumps: usize,
}

impl EstimatorResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.observables.iter().position(|n| n == name)
    }

    pub fn mean(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.means[i])
    }

    pub fn stderr(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.stderrs[i])
    }
}

/// Read-only data shared by all trajectories.
struct Unraveling {
    /// `−i H_eff`
    drift: CMatrix,
    jumps: Vec<CMatrix>,
    opts: OdeOptions,
    jump_tol: f64,
}

impl Unraveling {
    fn new(gen: &LindbladGenerator, rtol: f64, atol: f64, jump_tol: f64) -> Result<Self> {
        let jumps = gen.unit_rate_jumps()?;
        let drift = gen.h_eff() * (-I);
        Ok(Self {
            drift,
            jumps,
            opts: OdeOptions::with_tolerances(rtol, atol),
            jump_tol,
        })
    }

    /// Runs one trajectory and hands the normalized state to `on_sample` at
    /// every sample time. Returns the number of jumps.
    fn run<S>(
        &self,
        psi0: &CVector,
        times: &[f64],
        rng: &mut ChaCha8Rng,
        mut on_sample: S,
    ) -> Result<usize>
    where
        S: FnMut(usize, &CVector),
    {
        let drift = &self.drift;
        let start = CMatrix::from_column_slice(psi0.len(), 1, psi0.as_slice());
        let mut stepper = Dopri5::new(|_, y: &CMatrix| drift * y, 0.0, start, self.opts);
        let mut threshold = 1.0 - rng.random::<f64>();
        let mut jumps = 0usize;
        let mut norm_prev = linalg::frobenius_sq(stepper.y());
        for (k, &target) in times.iter().enumerate() {
            while stepper.t() < target {
                stepper.step(target)?;
                let norm = linalg::frobenius_sq(stepper.y());
                debug_assert!(
                    norm <= norm_prev * (1.0 + 1e-6) + 1e-12,
                    "norm grew between jumps"
                );
                norm_prev = norm;
                if norm > threshold {
                    continue;
                }
                let (t_jump, psi) = self.locate_jump(&stepper, threshold);
                let next = self.jump(&psi, rng)?;
                jumps += 1;
                stepper.restart(t_jump, next);
                threshold = 1.0 - rng.random::<f64>();
                norm_prev = 1.0;
            }
            let psi = stepper.y();
            let n = linalg::frobenius(psi);
            on_sample(k, &(psi.column(0) / linalg::real(n)));
        }
        Ok(jumps)
    }

    fn locate_jump<F>(&self, stepper: &Dopri5<F>, threshold: f64) -> (f64, CMatrix)
    where
        F: FnMut(f64, &CMatrix) -> CMatrix,
    {
        let (mut lo, mut hi) = (stepper.previous_time(), stepper.t());
        let width = (hi - lo).max(f64::MIN_POSITIVE);
        while hi - lo > self.jump_tol * width.max(hi.abs() * f64::EPSILON) {
            let mid = 0.5 * (lo + hi);
            // adjacent floats: the bracket cannot shrink further
            if mid <= lo || mid >= hi {
                break;
            }
            if linalg::frobenius_sq(&stepper.dense(mid)) > threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (hi, stepper.dense(hi))
    }

    fn jump(&self, psi: &CMatrix, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
        let candidates: Vec<CMatrix> = self.jumps.iter().map(|a| a * psi).collect();
        let weights: Vec<f64> = candidates.iter().map(linalg::frobenius_sq).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(OqsError::NumericalDegeneracy(
                "all jump operators annihilate the state".into(),
            ));
        }
        let mut pick = rng.random::<f64>() * total;
        let mut chosen = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                chosen = i;
                break;
            }
            pick -= w;
        }
        while weights[chosen] == 0.0 {
            chosen -= 1;
        }
        let v = &candidates[chosen];
        Ok(v / linalg::real(weights[chosen].sqrt()))
    }
}

fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn check_start(gen: &LindbladGenerator, psi0: &CVector) -> Result<()> {
    if psi0.len() != gen.h_coh().nrows() {
        return Err(OqsError::DimensionMismatch {
            expected: gen.h_coh().nrows(),
            got: psi0.len(),
        });
    }
    if (linalg::norm_sqr(psi0) - 1.0).abs() > 1e-10 {
        return Err(OqsError::ContractViolation(
            "initial state must be normalized".into(),
        ));
    }
    Ok(())
}

/// Time-averaged expectation values over `[burn_in, t_max]`, averaged over
/// trajectories.
pub fn unravel(
    gen: &LindbladGenerator,
    psi0: &CVector,
    observables: &[(String, CMatrix)],
    cfg: &TrajectoryConfig,
    exec: Execution,
) -> Result<EstimatorResult> {
    cfg.validate()?;
    check_start(gen, psi0)?;
    if gen.jumps().is_empty() {
        return Err(OqsError::ContractViolation(
            "unraveling needs at least one jump operator".into(),
        ));
    }
    let engine = Unraveling::new(gen, cfg.rtol, cfg.atol, cfg.jump_tol)?;
    let times = cfg.sample_times();
    let weights = trapezoid_weights(&times);
    let runs = exec.map(cfg.n_traj, |k| -> Result<(Vec<f64>, usize)> {
        let mut rng = trajectory_rng(cfg.seed, k);
        let mut acc = vec![0.0; observables.len()];
        let jumps = engine.run(psi0, &times, &mut rng, |i, psi| {
            for (a, (_, op)) in acc.iter_mut().zip(observables) {
                *a += weights[i] * linalg::expectation(op, psi);
            }
        })?;
        Ok((acc, jumps))
    });
    let mut samples = Vec::with_capacity(cfg.n_traj);
    let mut total_jumps = 0;
    for r in runs {
        let (s, j) = r?;
        samples.push(s);
        total_jumps += j;
    }
    let (means, stderrs) = mean_and_stderr(&samples, observables.len());
    Ok(EstimatorResult {
        observables: observables.iter().map(|(n, _)| n.clone()).collect(),
        means,
        stderrs,
        n_traj: cfg.n_traj,
        seed: cfg.seed,
        samples,
        total_jumps,
    })
}

/// Trajectory-ensemble estimate of `ρ(t)` at the given times.
pub fn ensemble_density(
    gen: &LindbladGenerator,
    psi0: &CVector,
    times: &[f64],
    n_traj: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<CMatrix>> {
    check_start(gen, psi0)?;
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OqsError::InvalidParameter("times must increase".into()));
    }
    let engine = Unraveling::new(gen, 1e-9, 1e-11, 1e-10)?;
    let dim = psi0.len();
    let runs = exec.map(n_traj, |k| -> Result<Vec<CMatrix>> {
        let mut rng = trajectory_rng(seed, k);
        let mut out = vec![linalg::zeros(dim); times.len()];
        engine.run(psi0, times, &mut rng, |i, psi| out[i] = psi * psi.adjoint())?;
        Ok(out)
    });
    let mut acc = vec![linalg::zeros(dim); times.len()];
    for r in runs {
        for (a, s) in acc.iter_mut().zip(r?) {
            *a += s;
        }
    }
    let n = linalg::real(n_traj as f64);
    Ok(acc.into_iter().map(|a| a / n).collect())
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n == 1 {
        return vec![1.0];
    }
    let span = times[n - 1] - times[0];
    let mut w = vec![0.0; n];
    for k in 1..n {
        let h = 0.5 * (times[k] - times[k - 1]) / span;
        w[k - 1] += h;
        w[k] += h;
    }
    w
}

fn mean_and_stderr(samples: &[Vec<f64>], m: usize) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len() as f64;
    let mut means = vec![0.0; m];
    for s in samples {
        for (a, v) in means.iter_mut().zip(s) {
            *a += v;
        }
    }
    for a in &mut means {
        *a /= n;
    }
    let mut stderrs = vec![0.0; m];
    if samples.len() > 1 {
        for s in samples {
            for ((e, v), mu) in stderrs.iter_mut().zip(s).zip(&means) {
                *e += (v - mu) * (v - mu);
            }
        }
        for e in &mut stderrs {
            *e = (*e / (n - 1.0)).sqrt() / n.sqrt();
        }
    }
    (means, stderrs)
}

/// Chain with two baths on the end sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NessSetup {
    pub sites: usize,
    pub particles: usize,
    pub hopping: f64,
    pub interaction: f64,
    pub left: BathSpec,
    pub right: BathSpec,
}

/// Truncated generator of a two-bath chain together with its observables.
pub fn ness_problem(
    setup: &NessSetup,
) -> Result<(LindbladGenerator, ChainObservables, Vec<BathChannel>)> {
    let basis = build_fermion_basis(setup.sites, setup.particles)?;
    let h = hubbard_on(&basis, setup.hopping, setup.interaction);
    let spectrum = diagonalize(&h)?;
    let n_first = number_operator(1, &basis)?;
    let n_last = number_operator(setup.sites, &basis)?;
    let channels = vec![
        BathChannel::from_operator(
            &n_first,
            &spectrum,
            Arc::new(setup.left.correlation()?),
            "left",
        )?,
        BathChannel::from_operator(
            &n_last,
            &spectrum,
            Arc::new(setup.right.correlation()?),
            "right",
        )?,
    ];
    let gen = truncated_generator(&channels, &spectrum, f64::INFINITY)?;
    let obs = ChainObservables::new(&basis, &spectrum)?;
    Ok((gen, obs, channels))
}

/// Particle imbalance `N_L − N_R` of the truncated equation by trajectories,
/// starting from the ground state of `H_S`.
pub fn ness_imbalance(
    setup: &NessSetup,
    cfg: &TrajectoryConfig,
    exec: Execution,
) -> Result<EstimatorResult> {
    let (gen, obs, _) = ness_problem(setup)?;
    let psi0 = InitialState::GroundState.vector(gen.h_coh().nrows());
    let mut list = vec![("imbalance".to_string(), obs.imbalance_operator())];
    for i in 1..=obs.sites() {
        list.push((format!("n{i}"), obs.number(i).clone()));
    }
    unravel(&gen, &psi0, &list, cfg, exec)
}
