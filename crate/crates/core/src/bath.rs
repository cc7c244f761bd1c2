// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Ohmic baths with a Drude cutoff.
//!
//! The bath correlation function is represented as a sum of decaying
//! exponentials, `C_τ = Σ_j c_j e^{−κ_j τ}`: one Drude pole at `κ_0 = E_c`
//! and Matsubara poles at `ν_l = 2πl/β`. Its half-Fourier transform
//! `G_t(Δ) = ∫_0^t e^{−iΔτ} C_τ dτ` is then known term by term.
//!
//! The Matsubara amplitudes fall off like `1/ν_l`, so `C_0` itself diverges
//! logarithmically and `G_∞` converges only like `1/l`. Terms beyond the
//! explicit count are therefore summed in closed form (digamma functions)
//! at `t = ∞`, and their slow build-up at finite `t` is modelled by the
//! leading `1/ν_l²` profile, which makes `G_0 = 0` and `G_∞` exact.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{OqsError, Result};
use crate::special::{digamma, dilog_tail, trigamma};

/// Exponentials with `κ t` above this are treated as zero.
const NEGLIGIBLE_EXPONENT: f64 = 45.0;
/// Hard cap on explicitly kept Matsubara terms.
const MAX_MATSUBARA: usize = 20_000;
const MIN_MATSUBARA: usize = 8;
/// Default relative weight below which Matsubara terms are left to the remainder.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeSpectralDensity {
    gamma: f64,
    cutoff: f64,
}

impl DrudeSpectralDensity {
    pub fn new(gamma: f64, cutoff: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(OqsError::InvalidParameter(format!(
                "coupling gamma must be positive, got {gamma}"
            )));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(OqsError::InvalidParameter(format!(
                "cutoff Ec must be positive, got {cutoff}"
            )));
        }
        Ok(Self { gamma, cutoff })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// `J(Δ) = γΔ / (1 + (Δ/E_c)²)`.
    pub fn eval(&self, delta: f64) -> f64 {
        let r = delta / self.cutoff;
        self.gamma * delta / (1.0 + r * r)
    }

    /// `J(Δ)/Δ`, finite at zero.
    fn slope(&self, delta: f64) -> f64 {
        let r = delta / self.cutoff;
        self.gamma / (1.0 + r * r)
    }
}

/// Parameters of one Drude bath: coupling, cutoff and temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub gamma: f64,
    pub cutoff: f64,
    pub temperature: f64,
}

impl BathSpec {
    pub fn new(gamma: f64, cutoff: f64, temperature: f64) -> Self {
        Self {
            gamma,
            cutoff,
            temperature,
        }
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn density(&self) -> Result<DrudeSpectralDensity> {
        DrudeSpectralDensity::new(self.gamma, self.cutoff)
    }

    pub fn correlation(&self) -> Result<CorrelationExpSum> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(OqsError::InvalidParameter(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        correlation_exp_sum(self.density()?, self.beta(), DEFAULT_TOLERANCE)
    }
}

/// Real and imaginary part of `G_t(Δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationValue {
    pub g: f64,
    pub h: f64,
}

impl From<Complex64> for CorrelationValue {
    fn from(z: Complex64) -> Self {
        Self { g: z.re, h: z.im }
    }
}

impl CorrelationValue {
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.g, self.h)
    }
}

/// A bath correlation function seen through its half-Fourier transform.
///
/// `deficit(Δ, t) = G_∞(Δ) − G_t(Δ)` is the part not yet accumulated at time
/// `t`; it vanishes beyond [`BathCorrelation::memory_time`].
pub trait BathCorrelation: Send + Sync + fmt::Debug {
    fn stationary(&self, delta: f64) -> Complex64;

    fn deficit(&self, delta: f64, t: f64) -> Complex64;

    fn memory_time(&self) -> f64;

    /// Precomputed form of `deficit` for a fixed set of splittings, if the
    /// model has one.
    fn transient_kernel(&self, _deltas: &[f64]) -> Option<TransientKernel> {
        None
    }

    fn deficits(&self, deltas: &[f64], t: f64, out: &mut [Complex64]) {
        for (o, &d) in out.iter_mut().zip(deltas) {
            *o = self.deficit(d, t);
        }
    }

    /// `G_t(Δ)`; `t = f64::INFINITY` gives the stationary value.
    fn value(&self, delta: f64, t: f64) -> Complex64 {
        if t.is_infinite() {
            self.stationary(delta)
        } else {
            self.stationary(delta) - self.deficit(delta, t)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub amplitude: Complex64,
    pub rate: f64,
}

/// `deficit(Δ_d, t)` for fixed splittings `Δ_d`:
/// `e^{−iΔ_d t} [Σ_j c_j e^{−κ_j t}/(κ_j + iΔ_d) + R_d w(t)]`,
/// optionally complex conjugated.
#[derive(Debug, Clone)]
pub struct TransientKernel {
    deltas: Vec<f64>,
    rates: Vec<f64>,
    /// `c_j/(κ_j + iΔ_d)`, term-major.
    coefs: Vec<Complex64>,
    remainder: Vec<Complex64>,
    spacing: f64,
    explicit: usize,
    conjugate: bool,
}

impl TransientKernel {
    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    fn conjugated(mut self) -> Self {
        self.conjugate = !self.conjugate;
        self
    }

    pub fn evaluate(&self, t: f64, out: &mut [Complex64]) {
        let n = self.deltas.len();
        let t = t.max(0.0);
        let profile = if t == 0.0 {
            1.0
        } else {
            let q = (-self.spacing * t).exp();
            dilog_tail(q, self.explicit) / trigamma((self.explicit + 1) as f64)
        };
        for (o, r) in out.iter_mut().zip(&self.remainder) {
            *o = r * profile;
        }
        for (j, &rate) in self.rates.iter().enumerate() {
            let kt = rate * t;
            if kt > NEGLIGIBLE_EXPONENT {
                continue;
            }
            let decay = (-kt).exp();
            let row = &self.coefs[j * n..(j + 1) * n];
            for (o, c) in out.iter_mut().zip(row) {
                *o += c * decay;
            }
        }
        for (o, &d) in out.iter_mut().zip(&self.deltas) {
            *o *= Complex64::new(0.0, -d * t).exp();
            if self.conjugate {
                *o = o.conj();
            }
        }
    }
}

/// Exponential-sum representation of the Drude bath correlation.
#[derive(Debug, Clone)]
pub struct CorrelationExpSum {
    density: DrudeSpectralDensity,
    beta: f64,
    tol: f64,
    terms: Vec<ExpTerm>,
    counterterm: bool,
}

pub fn check_pole_collision(beta: f64, cutoff: f64) -> Result<()> {
    let xi = beta * cutoff;
    let x = xi / (2.0 * PI);
    let nearest = x.round();
    if nearest >= 1.0 && (x - nearest).abs() <= 1e-6 * nearest {
        return Err(OqsError::DegenerateCutoff {
            xi,
            pole: nearest as usize,
        });
    }
    Ok(())
}

/// Builds the exponential sum for inverse temperature `beta`.
///
/// Matsubara terms are kept explicitly while their weight in `G_∞`,
/// `|c_l|/ν_l`, exceeds `tol · γ/β`, and never fewer than needed to pass the
/// cutoff pole.
pub fn correlation_exp_sum(
    density: DrudeSpectralDensity,
    beta: f64,
    tol: f64,
) -> Result<CorrelationExpSum> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(OqsError::InvalidParameter(format!(
            "inverse temperature must be positive and finite, got {beta}"
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(OqsError::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let ec = density.cutoff;
    let gamma = density.gamma;
    check_pole_collision(beta, ec)?;

    let half_xi = 0.5 * beta * ec;
    let drude = Complex64::new(
        0.5 * gamma * ec * ec / half_xi.tan(),
        -0.5 * gamma * ec * ec,
    );
    let mut terms = vec![ExpTerm {
        amplitude: drude,
        rate: ec,
    }];

    let x = beta * ec / (2.0 * PI);
    let min_count = MIN_MATSUBARA.max(x.ceil() as usize);
    for l in 1..=MAX_MATSUBARA {
        let nu = 2.0 * PI * l as f64 / beta;
        let ratio = nu / ec;
        let weight = 2.0 / (1.0 - ratio * ratio).abs();
        if l > min_count && weight < tol {
            break;
        }
        terms.push(ExpTerm {
            amplitude: Complex64::new(-2.0 * gamma / beta * nu / (1.0 - ratio * ratio), 0.0),
            rate: nu,
        });
    }

    Ok(CorrelationExpSum {
        density,
        beta,
        tol,
        terms,
        counterterm: false,
    })
}

impl CorrelationExpSum {
    pub fn density(&self) -> &DrudeSpectralDensity {
        &self.density
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn matsubara_count(&self) -> usize {
        self.terms.len() - 1
    }

    /// Same bath with the potential-renormalization counterterm switched on:
    /// the Δ-independent damping kernel `h_∞(0)` is removed from `G`.
    pub fn with_counterterm(mut self) -> Self {
        self.counterterm = true;
        self
    }

    pub fn has_counterterm(&self) -> bool {
        self.counterterm
    }

    fn matsubara_spacing(&self) -> f64 {
        2.0 * PI / self.beta
    }

    /// `Σ_{l > L} c_l / (ν_l + iΔ)` in closed form.
    fn remainder_stationary(&self, delta: f64) -> Complex64 {
        let a = self.matsubara_spacing();
        let ec = self.density.cutoff;
        let k = 2.0 * self.density.gamma * ec * ec / self.beta;
        let x = Complex64::new(ec / a, 0.0);
        let z = Complex64::new(0.0, delta / a);
        let start = (self.matsubara_count() + 1) as f64;
        let coef_a = 0.5 / (x + z);
        let coef_b = 0.5 / (z - x);
        let coef_c = -z / (z * z - x * x);
        let sum =
            coef_a * digamma(start - x) + coef_b * digamma(start + x) + coef_c * digamma(start + z);
        -k / (a * a) * sum
    }

    /// Fraction of the remainder not yet accumulated at time `t`.
    fn remainder_profile(&self, t: f64) -> f64 {
        let l = self.matsubara_count();
        let q = (-self.matsubara_spacing() * t).exp();
        dilog_tail(q, l) / trigamma((l + 1) as f64)
    }

    fn explicit_deficit(&self, delta: f64, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let kt = term.rate * t;
            if kt > NEGLIGIBLE_EXPONENT {
                continue;
            }
            let denom = Complex64::new(term.rate, delta);
            acc += term.amplitude * (-denom * t).exp() / denom;
        }
        acc
    }

    fn damping_shift(&self) -> Complex64 {
        if self.counterterm {
            Complex64::new(0.0, 0.5 * self.density.gamma * self.density.cutoff)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `C_τ` for `τ > 0`, including the Matsubara remainder summed until its
    /// terms are negligible.
    pub fn c_tau(&self, tau: f64) -> Complex64 {
        assert!(tau > 0.0, "C_τ diverges at τ = 0");
        let mut acc: Complex64 = self
            .terms
            .iter()
            .map(|t| t.amplitude * (-t.rate * tau).exp())
            .sum();
        let gamma = self.density.gamma;
        let ec = self.density.cutoff;
        let mut l = self.matsubara_count() + 1;
        loop {
            let nu = self.matsubara_spacing() * l as f64;
            if nu * tau > 60.0 {
                break;
            }
            let ratio = nu / ec;
            acc += -2.0 * gamma / self.beta * nu / (1.0 - ratio * ratio) * (-nu * tau).exp();
            l += 1;
        }
        acc
    }

    /// `G_t(Δ)` split into real and imaginary part.
    pub fn evaluate(&self, delta: f64, t: f64) -> CorrelationValue {
        self.value(delta, t).into()
    }
}

impl BathCorrelation for CorrelationExpSum {
    fn stationary(&self, delta: f64) -> Complex64 {
        let explicit: Complex64 = self
            .terms
            .iter()
            .map(|t| t.amplitude / Complex64::new(t.rate, delta))
            .sum();
        let v = explicit + self.remainder_stationary(delta) + self.damping_shift();
        // the summed series reproduces J(Δ)n(Δ) only up to rounding
        Complex64::new(g_inf(delta, &self.density, self.beta), v.im)
    }

    fn deficit(&self, delta: f64, t: f64) -> Complex64 {
        if t <= 0.0 {
            return self.stationary(delta) - self.damping_shift();
        }
        let profile = self.remainder_profile(t);
        let tail = if profile > 0.0 {
            self.remainder_stationary(delta) * Complex64::new(0.0, -delta * t).exp() * profile
        } else {
            Complex64::new(0.0, 0.0)
        };
        self.explicit_deficit(delta, t) + tail
    }

    fn deficits(&self, deltas: &[f64], t: f64, out: &mut [Complex64]) {
        if t <= 0.0 {
            for (o, &d) in out.iter_mut().zip(deltas) {
                *o = self.deficit(d, t);
            }
            return;
        }
        let profile = self.remainder_profile(t);
        for (o, &d) in out.iter_mut().zip(deltas) {
            let mut v = self.explicit_deficit(d, t);
            if profile > 0.0 {
                v += self.remainder_stationary(d) * Complex64::new(0.0, -d * t).exp() * profile;
            }
            *o = v;
        }
    }

    fn memory_time(&self) -> f64 {
        NEGLIGIBLE_EXPONENT / self.density.cutoff.min(self.matsubara_spacing())
    }

    fn transient_kernel(&self, deltas: &[f64]) -> Option<TransientKernel> {
        let mut coefs = Vec::with_capacity(self.terms.len() * deltas.len());
        for term in &self.terms {
            for &d in deltas {
                coefs.push(term.amplitude / Complex64::new(term.rate, d));
            }
        }
        Some(TransientKernel {
            deltas: deltas.to_vec(),
            rates: self.terms.iter().map(|t| t.rate).collect(),
            coefs,
            remainder: deltas
                .iter()
                .map(|&d| self.remainder_stationary(d))
                .collect(),
            spacing: self.matsubara_spacing(),
            explicit: self.matsubara_count(),
            conjugate: false,
        })
    }
}

/// Time-local (δ-correlated) bath: `G_t ≡ α` for every `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularCoupling {
    pub alpha: Complex64,
}

impl BathCorrelation for SingularCoupling {
    fn stationary(&self, _delta: f64) -> Complex64 {
        self.alpha
    }

    fn deficit(&self, _delta: f64, t: f64) -> Complex64 {
        if t <= 0.0 {
            self.alpha
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn memory_time(&self) -> f64 {
        0.0
    }
}

/// `Δ ↦ conj(G_t(−Δ))`, the filter seen by the adjoint channel of a
/// non-Hermitian coupling.
#[derive(Debug)]
pub struct Reflected(pub Arc<dyn BathCorrelation>);

impl BathCorrelation for Reflected {
    fn stationary(&self, delta: f64) -> Complex64 {
        self.0.stationary(-delta).conj()
    }

    fn deficit(&self, delta: f64, t: f64) -> Complex64 {
        self.0.deficit(-delta, t).conj()
    }

    fn memory_time(&self) -> f64 {
        self.0.memory_time()
    }

    fn transient_kernel(&self, deltas: &[f64]) -> Option<TransientKernel> {
        let flipped: Vec<f64> = deltas.iter().map(|d| -d).collect();
        self.0
            .transient_kernel(&flipped)
            .map(TransientKernel::conjugated)
    }
}

/// `G_t(Δ)` for any correlation model.
pub fn correlation_at(delta: f64, corr: &dyn BathCorrelation, t: f64) -> CorrelationValue {
    corr.value(delta, t).into()
}

/// `g_∞(Δ) = J(Δ) / (e^{βΔ} − 1)`, continuous at `Δ = 0` with value `γ/β`.
pub fn g_inf(delta: f64, density: &DrudeSpectralDensity, beta: f64) -> f64 {
    let x = beta * delta;
    if x.abs() < 1e-6 {
        density.slope(delta) / beta * (1.0 - 0.5 * x + x * x / 12.0)
    } else {
        density.eval(delta) / x.exp_m1()
    }
}

/// The three contributions to `h_∞(Δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImaginaryParts {
    /// `h_∞(0) = −γE_c/2`.
    pub damping_kernel: f64,
    /// Temperature independent, symmetric in Δ.
    pub vacuum: f64,
    /// Antisymmetric in Δ.
    pub thermal: f64,
}

impl ImaginaryParts {
    pub fn total(&self) -> f64 {
        self.damping_kernel + self.vacuum + self.thermal
    }
}

/// Splits `h_∞(Δ)` into damping kernel, vacuum and thermal parts.
///
/// With `matsubara = None` the thermal Matsubara series is summed in closed
/// form; `Some(n)` keeps the first `n` terms only.
pub fn h_inf_parts(
    delta: f64,
    density: &DrudeSpectralDensity,
    beta: f64,
    matsubara: Option<usize>,
) -> Result<ImaginaryParts> {
    check_pole_collision(beta, density.cutoff)?;
    let gamma = density.gamma;
    let ec = density.cutoff;
    let ec2 = ec * ec;
    let d2 = delta * delta;
    let damping_kernel = -0.5 * gamma * ec;
    let vacuum = gamma * d2 * ec / (2.0 * (ec2 + d2));

    let a = 2.0 * PI / beta;
    let series = match matsubara {
        Some(n) => (1..=n)
            .map(|l| {
                let nu = a * l as f64;
                nu / ((d2 + nu * nu) * (1.0 - nu * nu / ec2))
            })
            .sum::<f64>(),
        None => {
            let x = ec / a;
            let d = delta / a;
            let bracket = digamma(Complex64::new(1.0 - x, 0.0)).re
                + digamma(Complex64::new(1.0 + x, 0.0)).re
                - 2.0 * digamma(Complex64::new(1.0, d)).re;
            ec2 / (2.0 * a * (ec2 + d2)) * bracket
        }
    };
    let cot = 1.0 / (0.5 * beta * ec).tan();
    let thermal = delta * gamma * (-ec2 * cot / (2.0 * (ec2 + d2)) + 2.0 / beta * series);
    Ok(ImaginaryParts {
        damping_kernel,
        vacuum,
        thermal,
    })
}

/// Thermal Lamb-shift coefficient of an Ohmic bath in the limit of a large
/// cutoff at fixed `ξ = βE_c`, defined through `h^th_∞(Δ) → −γΔχ(ξ)`:
///
/// `χ(ξ) = cot(ξ/2)/2 + (ξ²/π) Σ_{l≥1} 1 / (l((2πl)² − ξ²))`.
pub fn chi(xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(OqsError::InvalidParameter(format!(
            "xi = beta*Ec must be positive, got {xi}"
        )));
    }
    // β·E_c with β = 1 reuses the collision guard.
    check_pole_collision(1.0, xi)?;
    let two_pi_sq = 4.0 * PI * PI;
    let mut sum = 0.0f64;
    let mut l = 1usize;
    loop {
        let lf = l as f64;
        let term = 1.0 / (lf * (two_pi_sq * lf * lf - xi * xi));
        sum += term;
        if l > 2 && term.abs() < 1e-12 * sum.abs() {
            break;
        }
        l += 1;
    }
    // Σ_{m>l} 1/(4π² m³) + O(m^-5)
    let next = (l + 1) as f64;
    let tail = (0.5 / (next * next) + 0.5 / (next * next * next) + 0.25 / next.powi(4)) / two_pi_sq;
    sum += tail;
    Ok(0.5 / (0.5 * xi).tan() + xi * xi / PI * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath(gamma: f64, ec: f64, temperature: f64) -> CorrelationExpSum {
        correlation_exp_sum(
            DrudeSpectralDensity::new(gamma, ec).unwrap(),
            1.0 / temperature,
            DEFAULT_TOLERANCE,
        )
        .unwrap()
    }

    #[test]
    fn stationary_real_part_is_bose_weighted_density() {
        let b = bath(0.1, 17.0, 5.0);
        for delta in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            let g = b.stationary(delta).re;
            let expected = g_inf(delta, b.density(), b.beta());
            assert!((g - expected).abs() < 1e-10, "Δ={delta}: {g} vs {expected}");
        }
    }

    #[test]
    fn g_inf_limits() {
        let j = DrudeSpectralDensity::new(0.3, 10.0).unwrap();
        assert!((g_inf(0.0, &j, 0.3) - 1.0).abs() < 1e-15);
        let kms = g_inf(-1.0, &j, 0.3) / g_inf(1.0, &j, 0.3);
        assert!((kms / 0.3f64.exp() - 1.0).abs() < 1e-12);
        assert!(g_inf(200.0, &j, 0.3) < 1e-20);
        // continuity across the series branch
        let left = g_inf(-2e-6 / 0.3, &j, 0.3);
        let right = g_inf(0.5e-6 / 0.3, &j, 0.3);
        assert!((left - right).abs() < 1e-5);
    }

    #[test]
    fn amplitudes() {
        let b = bath(0.1, 17.0, 0.5);
        let drude = b.terms()[0];
        assert_eq!(drude.rate, 17.0);
        assert!((drude.amplitude.im + 0.5 * 0.1 * 289.0).abs() < 1e-12);
        for t in &b.terms()[1..] {
            assert_eq!(t.amplitude.im, 0.0);
            if t.rate < 17.0 {
                assert!(t.amplitude.re < 0.0);
            }
        }
        assert!(b.matsubara_count() >= 8);
    }

    #[test]
    fn pole_collision_is_rejected() {
        let j = DrudeSpectralDensity::new(0.1, 2.0 * PI).unwrap();
        let err = correlation_exp_sum(j, 1.0, 1e-6).unwrap_err();
        assert!(matches!(err, OqsError::DegenerateCutoff { pole: 1, .. }));
        assert!(err.to_string().contains("perturb"));
        assert!(h_inf_parts(0.5, &j, 1.0, None).is_err());
        assert!(chi(4.0 * PI).is_err());
    }

    #[test]
    fn zero_time_and_long_time() {
        let b = bath(0.2, 17.0, 2.0);
        for delta in [-2.0, 0.0, 0.7] {
            assert!(b.value(delta, 0.0).norm() < 1e-12);
            let late = b.value(delta, 2.0 * b.memory_time());
            assert!((late - b.stationary(delta)).norm() < 1e-14);
        }
    }

    #[test]
    fn imaginary_parts_sum_to_stationary() {
        let b = bath(0.1, 17.0, 5.0);
        for delta in [-4.0, -1.0, 0.0, 0.3, 2.5] {
            let parts = h_inf_parts(delta, b.density(), b.beta(), None).unwrap();
            assert!((parts.total() - b.stationary(delta).im).abs() < 1e-10);
        }
        let zero = h_inf_parts(0.0, b.density(), b.beta(), None).unwrap();
        assert_eq!(zero.thermal, 0.0);
        assert_eq!(zero.vacuum, 0.0);
        let p = h_inf_parts(1.3, b.density(), b.beta(), None).unwrap();
        let m = h_inf_parts(-1.3, b.density(), b.beta(), None).unwrap();
        assert!((p.thermal + m.thermal).abs() < 1e-14);
        assert!((p.vacuum - m.vacuum).abs() < 1e-14);
        // truncated series converges to the closed form
        let trunc = h_inf_parts(1.3, b.density(), b.beta(), Some(20_000)).unwrap();
        assert!((trunc.thermal - p.thermal).abs() < 1e-8);
    }

    #[test]
    fn vacuum_vanishes_for_large_cutoff() {
        let small = h_inf_parts(
            1.0,
            &DrudeSpectralDensity::new(0.1, 1e2).unwrap(),
            1e-2,
            None,
        )
        .unwrap();
        let large = h_inf_parts(
            1.0,
            &DrudeSpectralDensity::new(0.1, 1e5).unwrap(),
            1e-5,
            None,
        )
        .unwrap();
        assert!(large.vacuum < small.vacuum * 1e-2);
    }

    #[test]
    fn chi_values() {
        let xi = 17.0 / 5.43;
        let v = chi(xi).unwrap();
        assert!(v.is_finite() && v > 0.0);
        // small ξ: cot(ξ/2)/2 ≈ 1/ξ dominates
        assert!((chi(1e-3).unwrap() * 1e-3 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn chi_matches_thermal_part_in_scaling_limit() {
        let xi = 17.0 / 5.43;
        let ec = 1e4;
        let beta = xi / ec;
        let j = DrudeSpectralDensity::new(0.1, ec).unwrap();
        let parts = h_inf_parts(1.0, &j, beta, None).unwrap();
        let limit = -0.1 * 1.0 * chi(xi).unwrap();
        assert!((parts.thermal - limit).abs() < 1e-6 * limit.abs());
    }

    #[test]
    fn counterterm_removes_damping_kernel() {
        let b = bath(0.1, 17.0, 5.0);
        let r = b.clone().with_counterterm();
        let shift = r.stationary(0.4) - b.stationary(0.4);
        assert!((shift.im - 0.5 * 0.1 * 17.0).abs() < 1e-14);
        assert!(shift.re.abs() < 1e-15);
    }

    #[test]
    fn kernel_matches_pointwise_deficit() {
        let b = bath(0.1, 17.0, 2.0);
        let deltas = [-3.1, -0.4, 0.0, 1.7];
        let r = Reflected(Arc::new(b.clone()));
        let kb = b.transient_kernel(&deltas).unwrap();
        let kr = r.transient_kernel(&deltas).unwrap();
        let mut out = vec![Complex64::new(0.0, 0.0); 4];
        for t in [0.0, 1e-3, 0.05, 0.7, 3.0] {
            kb.evaluate(t, &mut out);
            for (o, &d) in out.iter().zip(&deltas) {
                assert!((o - b.deficit(d, t)).norm() < 1e-12);
            }
            kr.evaluate(t, &mut out);
            for (o, &d) in out.iter().zip(&deltas) {
                assert!((o - r.deficit(d, t)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reflected_filter() {
        let b = bath(0.1, 17.0, 5.0);
        let r = Reflected(Arc::new(b.clone()));
        assert!((r.value(0.8, 1.5) - b.value(-0.8, 1.5).conj()).norm() < 1e-15);
    }
}
