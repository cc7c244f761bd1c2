// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! High-temperature limit of the truncated equation for the damped harmonic
//! oscillator, compared with the Brownian-motion jump operator.

use std::sync::Arc;

use num_complex::Complex64;

use crate::bath::{BathCorrelation, BathSpec};
use crate::dissipators::{channel_decompositions, BathChannel, Truncation};
use crate::error::{OqsError, Result};
use crate::linalg::{self, CMatrix, I};
use crate::models::{
    build_oscillator, diagonalize, to_eigenbasis, OscillatorModel, SpectrumDecomposition,
};

/// Relative change of the decomposition parameters tolerated when the Fock
/// space is halved.
pub const FOCK_INVARIANCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianPoint {
    pub temperature: f64,
    /// `λ²` for the unnormalized coupling `(a + a†)/√2`.
    pub lambda_sq: f64,
    /// `λ² / (γ T)`
    pub lambda_ratio: f64,
    pub phi: f64,
    /// `χ` in `G_∞(±Ω) ≈ γ[T ∓ iχΩ]`, read off the bath.
    pub chi: f64,
    /// Ratio of the `Q` and `P` coefficients of `Â⁺`.
    pub coefficient_ratio: Complex64,
    /// `2MT/χ`
    pub asymptotic_ratio: f64,
    /// `|coefficient_ratio| / |asymptotic_ratio|`
    pub ratio_agreement: f64,
    pub weight_ratio: f64,
}

/// Oscillator with the coupling `(a + a†)/√2` prepared in its eigenbasis.
#[derive(Debug, Clone)]
pub struct BrownianLimit {
    osc: OscillatorModel,
    spectrum: SpectrumDecomposition,
    lower: CMatrix,
}

impl BrownianLimit {
    pub fn new(osc: OscillatorModel) -> Result<Self> {
        let spectrum = diagonalize(&osc.hamiltonian())?;
        let lower = to_eigenbasis(&osc.annihilation_operator(), &spectrum)?.into_matrix();
        Ok(Self {
            osc,
            spectrum,
            lower,
        })
    }

    pub fn oscillator(&self) -> &OscillatorModel {
        &self.osc
    }

    /// Evaluates the optimal decomposition at `bath`, with the
    /// potential-renormalization counterterm. Requires the Fock space to
    /// resolve the thermal state at `bath.temperature`.
    pub fn point(&self, bath: BathSpec) -> Result<BrownianPoint> {
        self.osc.check_thermal_truncation(bath.temperature)?;
        self.point_unresolved(bath)
    }

    /// As [`point`](Self::point) but without the thermal Fock check. The
    /// decomposition of a linear coupling does not depend on `n_max`; use
    /// [`fock_defect`] to confirm.
    pub fn point_unresolved(&self, bath: BathSpec) -> Result<BrownianPoint> {
        let corr = bath.correlation()?.with_counterterm();
        let omega = self.osc.omega;
        let chi =
            (corr.stationary(-omega).im - corr.stationary(omega).im) / (2.0 * bath.gamma * omega);
        let coupling =
            (&self.lower + self.lower.adjoint()) * linalg::real(std::f64::consts::FRAC_1_SQRT_2);
        let channel = BathChannel::new(coupling, Arc::new(corr), "position")?;
        let strength = channel.strength();
        let dec = channel_decompositions(
            &[channel],
            &self.spectrum,
            f64::INFINITY,
            Truncation::Optimal,
        )?
        .pop()
        .ok_or_else(|| OqsError::DegenerateDecomposition("no channel".into()))?;
        let params = dec.decomposition.params;
        let lambda_sq = params.lambda_sq / strength;

        let (m, w) = (self.osc.mass, omega);
        let adag = self.lower.adjoint();
        let q = (&self.lower + &adag) * linalg::real((0.5 / (m * w)).sqrt());
        let p = (&adag - &self.lower) * (I * (0.5 * m * w).sqrt());
        let a = &dec.decomposition.a_plus;
        let cq = linalg::hs_inner(a, &q) / linalg::frobenius_sq(&q);
        let cp = linalg::hs_inner(a, &p) / linalg::frobenius_sq(&p);
        let coefficient_ratio = cq / cp;
        let asymptotic_ratio = 2.0 * m * bath.temperature / chi;
        let (wp, wm) = dec.weights;
        Ok(BrownianPoint {
            temperature: bath.temperature,
            lambda_sq,
            lambda_ratio: lambda_sq / (bath.gamma * bath.temperature),
            phi: params.phi,
            chi,
            coefficient_ratio,
            asymptotic_ratio,
            ratio_agreement: coefficient_ratio.norm() / asymptotic_ratio.abs(),
            weight_ratio: wm / wp,
        })
    }
}

/// Largest relative change of `λ²`, `φ` and the coefficient ratio when the
/// Fock space is cut to half its size.
pub fn fock_defect(limit: &BrownianLimit, bath: BathSpec) -> Result<f64> {
    let osc = limit.oscillator();
    let half = BrownianLimit::new(build_oscillator(
        osc.mass,
        osc.omega,
        (osc.n_max / 2).max(2),
    )?)?;
    let a = limit.point_unresolved(bath)?;
    let b = half.point_unresolved(bath)?;
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(f64::MIN_POSITIVE);
    Ok(rel(a.lambda_sq, b.lambda_sq)
        .max((a.phi - b.phi).abs())
        .max((a.coefficient_ratio - b.coefficient_ratio).norm() / a.coefficient_ratio.norm()))
}

/// Two-point extrapolation to `T → ∞` for a quantity with `T⁻²` corrections.
pub fn extrapolate_inverse_square(t1: f64, v1: f64, t2: f64, v2: f64) -> f64 {
    let r = (t2 / t1).powi(2);
    (r * v2 - v1) / (r - 1.0)
}
