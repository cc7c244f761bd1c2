// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Convolution operators, Lamb shifts and the four generators built from
//! them.
//!
//! Everything here works in the energy eigenbasis of `H_S`. A channel couples
//! the system through an operator `X` (normalized, `‖X‖_F = 1`) to a bath with
//! correlation `G_t`; the convolution operator is the element-wise filter
//! `𝕏_qk = X_qk · s² G_t(Δ_qk)` where `s` is the folded-in normalization.
//!
//! For each channel the Redfield action is
//!
//! `Xρ𝕏† + 𝕏ρX† − X†𝕏ρ − ρ𝕏†X`,
//!
//! which splits into the Lamb shift `(X†𝕏 − 𝕏†X)/2i` and a dissipator. For
//! Hermitian `X` this is the familiar `Sρ𝕊† + 𝕊ρS − S𝕊ρ − ρ𝕊†S`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bath::{BathCorrelation, Reflected, TransientKernel};
use crate::error::{OqsError, Result};
use crate::exec::Execution;
use crate::linalg::{self, CMatrix, I, ONE, ZERO};
use crate::models::{to_eigenbasis, ManyBodyOperator, SpectrumDecomposition};

/// Splittings closer than this are one secular block.
pub const SECULAR_TOLERANCE: f64 = 1e-9;

/// Anything that maps a density matrix (eigenbasis) to its time derivative.
pub trait MasterEquation: Send + Sync {
    fn dim(&self) -> usize;

    /// `dρ/dt` at time `t`; frozen generators ignore `t`.
    fn apply(&self, t: f64, rho: &CMatrix) -> CMatrix;

    fn is_time_dependent(&self) -> bool {
        false
    }
}

/// One system–bath coupling term.
#[derive(Clone)]
pub struct BathChannel {
    op: CMatrix,
    scale: f64,
    prefactor: f64,
    corr: Arc<dyn BathCorrelation>,
    label: String,
}

impl fmt::Debug for BathChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BathChannel")
            .field("label", &self.label)
            .field("dim", &self.op.nrows())
            .field("scale", &self.scale)
            .field("prefactor", &self.prefactor)
            .field("corr", &self.corr)
            .finish()
    }
}

impl BathChannel {
    /// Channel from a coupling operator already expressed in the eigenbasis.
    /// The operator is Frobenius-normalized; its norm is kept as `scale`.
    pub fn new(
        op_eigen: CMatrix,
        corr: Arc<dyn BathCorrelation>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if op_eigen.nrows() != op_eigen.ncols() {
            return Err(OqsError::DimensionMismatch {
                expected: op_eigen.nrows(),
                got: op_eigen.ncols(),
            });
        }
        let scale = linalg::frobenius(&op_eigen);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(OqsError::InvalidParameter(
                "coupling operator must be nonzero".into(),
            ));
        }
        Ok(Self {
            op: op_eigen / linalg::real(scale),
            scale,
            prefactor: 1.0,
            corr,
            label: label.into(),
        })
    }

    /// Channel from an operator in the model basis.
    pub fn from_operator(
        op: &ManyBodyOperator,
        spectrum: &SpectrumDecomposition,
        corr: Arc<dyn BathCorrelation>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let eig = to_eigenbasis(op, spectrum)?;
        Self::new(eig.into_matrix(), corr, label)
    }

    fn with_prefactor(mut self, prefactor: f64) -> Self {
        self.prefactor = prefactor;
        self
    }

    /// Normalized coupling operator `X`.
    pub fn op(&self) -> &CMatrix {
        &self.op
    }

    /// Frobenius norm of the operator before normalization.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// Factor multiplying `G_t` in the convolution operator.
    pub fn strength(&self) -> f64 {
        self.scale * self.scale * self.prefactor
    }

    pub fn correlation(&self) -> &Arc<dyn BathCorrelation> {
        &self.corr
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.op.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        linalg::is_hermitian(&self.op, 1e-12)
    }
}

/// Channels for `H_SB = ½(S⊗B + S†⊗B†)`.
///
/// `forward` is the filter of `⟨B†(τ)B⟩` and `backward` that of `⟨BB†(τ)⟩`.
/// The first channel carries `S`, the second `S†` with the reflected filter
/// `conj(G(−Δ))`; both with weight ½.
pub fn split_nonhermitian(
    op_eigen: &CMatrix,
    forward: Arc<dyn BathCorrelation>,
    backward: Arc<dyn BathCorrelation>,
    label: &str,
) -> Result<[BathChannel; 2]> {
    let first =
        BathChannel::new(op_eigen.clone(), forward, format!("{label}:1"))?.with_prefactor(0.5);
    let second = BathChannel::new(
        op_eigen.adjoint(),
        Arc::new(Reflected(backward)),
        format!("{label}:2"),
    )?
    .with_prefactor(0.5);
    Ok([first, second])
}

/// `𝕏_t` in the energy eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionOperator {
    pub matrix: CMatrix,
    pub t: f64,
}

fn check_dim(channel: &BathChannel, spectrum: &SpectrumDecomposition) -> Result<()> {
    if channel.dim() != spectrum.dim() {
        return Err(OqsError::DimensionMismatch {
            expected: spectrum.dim(),
            got: channel.dim(),
        });
    }
    Ok(())
}

pub fn build_convolution(
    channel: &BathChannel,
    spectrum: &SpectrumDecomposition,
    t: f64,
) -> Result<ConvolutionOperator> {
    check_dim(channel, spectrum)?;
    let filter = FilterTable::new(channel, spectrum, false);
    Ok(ConvolutionOperator {
        matrix: filter.convolution(channel, t),
        t,
    })
}

/// Precomputed `s²G_∞(Δ_qk)` (and the transient kernel) for one channel.
#[derive(Clone)]
struct FilterTable {
    deltas: Vec<f64>,
    stationary: Vec<Complex64>,
    kernel: Option<TransientKernel>,
    memory_time: f64,
}

impl FilterTable {
    fn new(channel: &BathChannel, spectrum: &SpectrumDecomposition, transient: bool) -> Self {
        let dim = spectrum.dim();
        let strength = channel.strength();
        let mut deltas = Vec::with_capacity(dim * dim);
        for k in 0..dim {
            for q in 0..dim {
                deltas.push(spectrum.splitting(q, k));
            }
        }
        let stationary = deltas
            .iter()
            .map(|&d| channel.corr.stationary(d) * strength)
            .collect();
        let kernel = if transient {
            channel.corr.transient_kernel(&deltas)
        } else {
            None
        };
        Self {
            deltas,
            stationary,
            kernel,
            memory_time: channel.corr.memory_time(),
        }
    }

    fn convolution(&self, channel: &BathChannel, t: f64) -> CMatrix {
        let dim = channel.dim();
        let mut out = channel.op.clone();
        if t.is_infinite() || t > self.memory_time {
            for (o, g) in out.as_mut_slice().iter_mut().zip(&self.stationary) {
                *o *= g;
            }
            return out;
        }
        let mut deficits = vec![ZERO; dim * dim];
        match &self.kernel {
            Some(k) => k.evaluate(t, &mut deficits),
            None => channel.corr.deficits(&self.deltas, t, &mut deficits),
        }
        let strength = channel.strength();
        for ((o, g), d) in out
            .as_mut_slice()
            .iter_mut()
            .zip(&self.stationary)
            .zip(&deficits)
        {
            *o *= g - d * strength;
        }
        out
    }
}

/// `(X†𝕏 − 𝕏†X)/2i`.
pub fn lamb_shift(op: &CMatrix, conv: &CMatrix) -> Result<CMatrix> {
    if op.shape() != conv.shape() {
        return Err(OqsError::DimensionMismatch {
            expected: op.nrows(),
            got: conv.nrows(),
        });
    }
    let a = op.adjoint() * conv;
    let h = (&a - a.adjoint()) * Complex64::new(0.0, -0.5);
    debug_assert!(linalg::hermiticity_defect(&h) <= 1e-12 * linalg::max_abs(&h).max(1.0));
    Ok(linalg::hermitize(&h))
}

/// Redfield dissipator `Xρ𝕏† + 𝕏ρX† − ½{X†𝕏 + 𝕏†X, ρ}` of one channel.
pub fn redfield_dissipator(op: &CMatrix, conv: &CMatrix, rho: &CMatrix) -> CMatrix {
    let a = op.adjoint() * conv;
    let m = (&a + a.adjoint()) * linalg::real(0.5);
    op * rho * conv.adjoint() + conv * rho * op.adjoint() - &m * rho - rho * &m
}

/// `−i[H, ρ]` for `H = diag(energies)`.
fn diagonal_commutator(energies: &[f64], rho: &CMatrix) -> CMatrix {
    CMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| {
        -I * (energies[i] - energies[j]) * rho[(i, j)]
    })
}

#[derive(Debug, Clone)]
struct RedfieldTerm {
    op: CMatrix,
    conv: CMatrix,
    /// `X†𝕏`
    drift: CMatrix,
}

impl RedfieldTerm {
    fn new(op: CMatrix, conv: CMatrix) -> Self {
        let drift = op.adjoint() * &conv;
        Self { op, conv, drift }
    }
}

/// Redfield generator with all convolution operators evaluated at one time.
#[derive(Debug, Clone)]
pub struct RedfieldGenerator {
    energies: Vec<f64>,
    terms: Vec<RedfieldTerm>,
    t: f64,
}

impl RedfieldGenerator {
    /// Generator frozen at `t` (use `f64::INFINITY` for the stationary one).
    pub fn new(channels: &[BathChannel], spectrum: &SpectrumDecomposition, t: f64) -> Result<Self> {
        let convs = convolutions(channels, spectrum, t)?;
        Ok(Self::assemble(spectrum, channels, convs, t))
    }

    fn assemble(
        spectrum: &SpectrumDecomposition,
        channels: &[BathChannel],
        convs: Vec<CMatrix>,
        t: f64,
    ) -> Self {
        let terms = channels
            .iter()
            .zip(convs)
            .map(|(ch, c)| RedfieldTerm::new(ch.op.clone(), c))
            .collect();
        Self {
            energies: spectrum.energies().to_vec(),
            terms,
            t,
        }
    }

    /// Direct construction from operator pairs `(X, 𝕏)`.
    pub fn from_parts(energies: Vec<f64>, parts: Vec<(CMatrix, CMatrix)>) -> Result<Self> {
        let dim = energies.len();
        for (x, c) in &parts {
            for m in [x, c] {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(OqsError::DimensionMismatch {
                        expected: dim,
                        got: m.nrows(),
                    });
                }
            }
        }
        Ok(Self {
            energies,
            terms: parts
                .into_iter()
                .map(|(x, c)| RedfieldTerm::new(x, c))
                .collect(),
            t: f64::INFINITY,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Total Lamb shift `Σ_α H_LS,α`.
    pub fn lamb_shift(&self) -> CMatrix {
        let dim = self.energies.len();
        let mut h = linalg::zeros(dim);
        for term in &self.terms {
            h += lamb_shift(&term.op, &term.conv).expect("shapes checked at construction");
        }
        h
    }

    /// Dissipative part only.
    pub fn dissipator(&self, rho: &CMatrix) -> CMatrix {
        let mut out = linalg::zeros(rho.nrows());
        for term in &self.terms {
            out += redfield_dissipator(&term.op, &term.conv, rho);
        }
        out
    }

    pub fn convolutions(&self) -> impl Iterator<Item = (&CMatrix, &CMatrix)> {
        self.terms.iter().map(|t| (&t.op, &t.conv))
    }
}

impl MasterEquation for RedfieldGenerator {
    fn dim(&self) -> usize {
        self.energies.len()
    }

    fn apply(&self, _t: f64, rho: &CMatrix) -> CMatrix {
        let mut out = diagonal_commutator(&self.energies, rho);
        for term in &self.terms {
            out += &term.op * rho * term.conv.adjoint() + &term.conv * rho * term.op.adjoint()
                - &term.drift * rho
                - rho * term.drift.adjoint();
        }
        out
    }
}

/// Jump operator `L` with rate `r` in `r(LρL† − ½{L†L, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub op: CMatrix,
    pub rate: f64,
}

/// Generator in (pseudo-)Lindblad form:
/// `−i[H_coh, ρ] + Σ_k r_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    h_coh: CMatrix,
    jumps: Vec<Jump>,
    /// `H_coh − (i/2) Σ r_k L_k†L_k`
    h_eff: CMatrix,
    warnings: Vec<String>,
}

impl LindbladGenerator {
    pub fn new(h_coh: CMatrix, jumps: Vec<Jump>) -> Result<Self> {
        let dim = h_coh.nrows();
        let defect = linalg::hermiticity_defect(&h_coh);
        if defect > 1e-12 * linalg::max_abs(&h_coh).max(1.0) {
            return Err(OqsError::ContractViolation(format!(
                "coherent Hamiltonian is not Hermitian (defect {defect:.3e})"
            )));
        }
        let h_coh = linalg::hermitize(&h_coh);
        let mut decay = linalg::zeros(dim);
        for j in &jumps {
            if j.op.nrows() != dim || j.op.ncols() != dim {
                return Err(OqsError::DimensionMismatch {
                    expected: dim,
                    got: j.op.nrows(),
                });
            }
            decay += j.op.adjoint() * &j.op * linalg::real(j.rate);
        }
        let h_eff = &h_coh - decay * Complex64::new(0.0, 0.5);
        Ok(Self {
            h_coh,
            jumps,
            h_eff,
            warnings: Vec::new(),
        })
    }

    pub fn h_coh(&self) -> &CMatrix {
        &self.h_coh
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn h_eff(&self) -> &CMatrix {
        &self.h_eff
    }

    /// Diagnostics raised during construction (e.g. negative RWA rates).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// All rates nonnegative.
    pub fn is_lindblad(&self) -> bool {
        self.jumps.iter().all(|j| j.rate >= 0.0)
    }

    /// Jump operators with the rate absorbed, `√r L`. Requires Lindblad form.
    pub fn unit_rate_jumps(&self) -> Result<Vec<CMatrix>> {
        self.jumps
            .iter()
            .map(|j| {
                if j.rate < 0.0 {
                    Err(OqsError::ContractViolation(
                        "negative rate has no unit-rate jump operator".into(),
                    ))
                } else {
                    Ok(&j.op * linalg::real(j.rate.sqrt()))
                }
            })
            .collect()
    }

    /// Same generator without jump operators (pure `H_coh` dynamics).
    pub fn coherent_part(&self) -> Self {
        Self::new(self.h_coh.clone(), Vec::new()).expect("already validated")
    }
}

impl MasterEquation for LindbladGenerator {
    fn dim(&self) -> usize {
        self.h_coh.nrows()
    }

    fn apply(&self, _t: f64, rho: &CMatrix) -> CMatrix {
        let left = &self.h_eff * rho;
        let mut out = (rho * self.h_eff.adjoint() - left) * I;
        for j in &self.jumps {
            out += &j.op * rho * j.op.adjoint() * linalg::real(j.rate);
        }
        out
    }
}

/// Rotating-wave (Davies) generator.
///
/// Transitions are grouped by Bohr frequency: `A_ω = Σ_{Δ_qk ≈ ω} X_qk |q⟩⟨k|`
/// with rate `2s²g_t(ω)` and Lamb shift `Σ_ω s²h_t(ω) A_ω†A_ω`. Negative rates
/// (possible at finite `t`) are kept and reported in the warnings.
pub fn rwa_generator(
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
) -> Result<LindbladGenerator> {
    let convs = convolutions(channels, spectrum, t)?;
    rwa_from(spectrum, channels, &convs, t)
}

fn rwa_from(
    spectrum: &SpectrumDecomposition,
    channels: &[BathChannel],
    convs: &[CMatrix],
    t: f64,
) -> Result<LindbladGenerator> {
    let dim = spectrum.dim();
    let mut h_coh = linalg::from_real_diagonal(spectrum.energies());
    let mut jumps = Vec::new();
    let mut warnings = Vec::new();
    for (ch, conv) in channels.iter().zip(convs) {
        for block in secular_blocks(ch.op(), spectrum) {
            let omega = block.omega;
            let (q0, k0) = block.pairs[0];
            // s²G_t(ω) from the filtered matrix element
            let g = conv[(q0, k0)] / ch.op[(q0, k0)];
            let mut a = linalg::zeros(dim);
            for &(q, k) in &block.pairs {
                a[(q, k)] = ch.op[(q, k)];
            }
            let ata = a.adjoint() * &a;
            h_coh += &ata * linalg::real(g.im);
            if g.re < 0.0 {
                if t.is_infinite() {
                    return Err(OqsError::ContractViolation(format!(
                        "negative stationary rate g({omega}) = {}",
                        g.re
                    )));
                }
                warnings.push(format!(
                    "{}: negative rate 2g_t({omega:.6}) = {:.3e} at t = {t}",
                    ch.label,
                    2.0 * g.re
                ));
            }
            jumps.push(Jump {
                op: a,
                rate: 2.0 * g.re,
            });
        }
    }
    let mut gen = LindbladGenerator::new(linalg::hermitize(&h_coh), jumps)?;
    gen.warnings = warnings;
    Ok(gen)
}

fn convolutions(
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
) -> Result<Vec<CMatrix>> {
    channels
        .iter()
        .map(|ch| build_convolution(ch, spectrum, t).map(|c| c.matrix))
        .collect()
}

#[derive(Debug, Clone)]
struct SecularBlock {
    omega: f64,
    pairs: Vec<(usize, usize)>,
}

fn secular_blocks(op: &CMatrix, spectrum: &SpectrumDecomposition) -> Vec<SecularBlock> {
    let dim = spectrum.dim();
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    for k in 0..dim {
        for q in 0..dim {
            if op[(q, k)] != ZERO {
                entries.push((spectrum.splitting(q, k), q, k));
            }
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut blocks: Vec<SecularBlock> = Vec::new();
    for (omega, q, k) in entries {
        match blocks.last_mut() {
            Some(b) if (omega - b.omega).abs() <= SECULAR_TOLERANCE => b.pairs.push((q, k)),
            _ => blocks.push(SecularBlock {
                omega,
                pairs: vec![(q, k)],
            }),
        }
    }
    blocks
}

/// Free parameters of the pseudo-Lindblad decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionParams {
    pub lambda_sq: f64,
    pub phi: f64,
}

impl DecompositionParams {
    /// `λ² = 1` (one inverse time unit), `φ = 0`.
    pub const FIXED: DecompositionParams = DecompositionParams {
        lambda_sq: 1.0,
        phi: 0.0,
    };
}

/// How the truncated generator picks `(λ², φ)` per channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    Optimal,
    Fixed(DecompositionParams),
}

/// `λ² = ‖𝕏‖/‖X‖`, `sin φ = −Im tr(X𝕏†)/(‖X‖‖𝕏‖)`: the minimizer of `‖A⁻‖²`.
pub fn optimal_params(op: &CMatrix, conv: &CMatrix) -> Result<DecompositionParams> {
    let ns = linalg::frobenius(op);
    let nc = linalg::frobenius(conv);
    if nc == 0.0 || ns == 0.0 {
        return Err(OqsError::DegenerateDecomposition(
            "convolution operator vanishes (t = 0 or zero coupling)".into(),
        ));
    }
    let z = linalg::hs_inner(op, conv);
    let s = (-z.im / (ns * nc)).clamp(-1.0, 1.0);
    Ok(DecompositionParams {
        lambda_sq: nc / ns,
        phi: s.asin(),
    })
}

/// `A^± = [λ^± X ± 𝕏/λ^±] / √(2 cos φ)`, `λ^± = √λ² e^{∓iφ/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLindbladDecomposition {
    pub params: DecompositionParams,
    pub a_plus: CMatrix,
    pub a_minus: CMatrix,
}

pub fn decompose(
    op: &CMatrix,
    conv: &CMatrix,
    params: DecompositionParams,
) -> Result<PseudoLindbladDecomposition> {
    let DecompositionParams { lambda_sq, phi } = params;
    if !(lambda_sq > 0.0 && lambda_sq.is_finite()) {
        return Err(OqsError::InvalidParameter(format!(
            "lambda^2 must be positive, got {lambda_sq}"
        )));
    }
    if !(phi.abs() < FRAC_PI_2) {
        return Err(OqsError::InvalidParameter(format!(
            "phi must lie in (-pi/2, pi/2), got {phi}"
        )));
    }
    if op.shape() != conv.shape() {
        return Err(OqsError::DimensionMismatch {
            expected: op.nrows(),
            got: conv.nrows(),
        });
    }
    let norm = 1.0 / (2.0 * phi.cos()).sqrt();
    let lambda = lambda_sq.sqrt();
    let lp = Complex64::from_polar(lambda, -0.5 * phi);
    let lm = Complex64::from_polar(lambda, 0.5 * phi);
    let a_plus = (op * lp + conv * lp.inv()) * linalg::real(norm);
    let a_minus = (op * lm - conv * lm.inv()) * linalg::real(norm);
    Ok(PseudoLindbladDecomposition {
        params,
        a_plus,
        a_minus,
    })
}

impl PseudoLindbladDecomposition {
    /// `Σ_σ σ(A^σ ρ A^σ† − ½{A^σ†A^σ, ρ})`.
    pub fn dissipator(&self, rho: &CMatrix) -> CMatrix {
        lindblad_term(&self.a_plus, rho) - lindblad_term(&self.a_minus, rho)
    }
}

fn lindblad_term(a: &CMatrix, rho: &CMatrix) -> CMatrix {
    let ada = a.adjoint() * a * linalg::real(0.5);
    a * rho * a.adjoint() - &ada * rho - rho * &ada
}

/// `(‖A⁺‖², ‖A⁻‖²)`.
pub fn weights(dec: &PseudoLindbladDecomposition) -> (f64, f64) {
    (
        linalg::frobenius_sq(&dec.a_plus),
        linalg::frobenius_sq(&dec.a_minus),
    )
}

/// Weights at the optimum, `±Re z + √(‖X‖²‖𝕏‖² − (Im z)²)` with `z = tr(X𝕏†)`.
pub fn optimal_weights(op: &CMatrix, conv: &CMatrix) -> (f64, f64) {
    let z = linalg::hs_inner(op, conv);
    let n2 = linalg::frobenius_sq(op) * linalg::frobenius_sq(conv);
    let root = (n2 - z.im * z.im).max(0.0).sqrt();
    (root + z.re, root - z.re)
}

/// Weights for arbitrary admissible parameters, in closed form.
pub fn weights_at(op: &CMatrix, conv: &CMatrix, params: DecompositionParams) -> (f64, f64) {
    let DecompositionParams { lambda_sq, phi } = params;
    let z = linalg::hs_inner(op, conv);
    let base = lambda_sq * linalg::frobenius_sq(op) + linalg::frobenius_sq(conv) / lambda_sq;
    let (s, c) = phi.sin_cos();
    let cross = 2.0 * c * z.re;
    let twist = 2.0 * s * z.im;
    let norm = 0.5 / c;
    (norm * (base + cross + twist), norm * (base - cross + twist))
}

/// Per-channel decomposition data for one evaluation time.
#[derive(Debug, Clone)]
pub struct ChannelDecomposition {
    pub label: String,
    pub decomposition: PseudoLindbladDecomposition,
    pub weights: (f64, f64),
}

/// Exact pseudo-Lindblad rewriting of the Redfield generator: two jumps per
/// channel, the second with rate −1.
pub fn pseudo_lindblad_generator(
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
    truncation: Truncation,
) -> Result<LindbladGenerator> {
    lindblad_family(channels, spectrum, t, truncation, true)
}

/// Lindblad generator with the full Lamb shift and only `A⁺` per channel.
pub fn truncated_generator(
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
) -> Result<LindbladGenerator> {
    lindblad_family(channels, spectrum, t, Truncation::Optimal, false)
}

pub fn truncated_generator_with(
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
    truncation: Truncation,
) -> Result<LindbladGenerator> {
    lindblad_family(channels, spectrum, t, truncation, false)
}

/// Decompositions and weights for every channel at time `t`.
pub fn channel_decompositions(
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
    truncation: Truncation,
) -> Result<Vec<ChannelDecomposition>> {
    channels
        .iter()
        .map(|ch| {
            let conv = build_convolution(ch, spectrum, t)?.matrix;
            let params = match truncation {
                Truncation::Optimal => optimal_params(&ch.op, &conv)?,
                Truncation::Fixed(p) => p,
            };
            let decomposition = decompose(&ch.op, &conv, params)?;
            let weights = weights(&decomposition);
            Ok(ChannelDecomposition {
                label: ch.label.clone(),
                decomposition,
                weights,
            })
        })
        .collect()
}

fn lindblad_family(
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
    truncation: Truncation,
    keep_negative: bool,
) -> Result<LindbladGenerator> {
    let convs = convolutions(channels, spectrum, t)?;
    lindblad_from(spectrum, channels, &convs, truncation, keep_negative)
}

fn lindblad_from(
    spectrum: &SpectrumDecomposition,
    channels: &[BathChannel],
    convs: &[CMatrix],
    truncation: Truncation,
    keep_negative: bool,
) -> Result<LindbladGenerator> {
    let mut h_coh = linalg::from_real_diagonal(spectrum.energies());
    let mut jumps = Vec::new();
    for (ch, conv) in channels.iter().zip(convs) {
        if linalg::frobenius(conv) == 0.0 && truncation == Truncation::Optimal {
            // nothing accumulated yet: the channel contributes nothing
            continue;
        }
        h_coh += lamb_shift(&ch.op, conv)?;
        let params = match truncation {
            Truncation::Optimal => optimal_params(&ch.op, conv)?,
            Truncation::Fixed(p) => p,
        };
        let dec = decompose(&ch.op, conv, params)?;
        jumps.push(Jump {
            op: dec.a_plus,
            rate: 1.0,
        });
        if keep_negative {
            jumps.push(Jump {
                op: dec.a_minus,
                rate: -1.0,
            });
        }
    }
    LindbladGenerator::new(h_coh, jumps)
}

/// Which generator a [`TimeDependentGenerator`] rebuilds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    Redfield,
    Rwa,
    PseudoLindblad(Truncation),
    Truncated(Truncation),
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::Redfield => "redfield",
            GeneratorKind::Rwa => "rwa",
            GeneratorKind::PseudoLindblad(_) => "pseudo",
            GeneratorKind::Truncated(Truncation::Optimal) => "truncated",
            GeneratorKind::Truncated(Truncation::Fixed(_)) => "truncated-fixed",
        }
    }
}

enum Frozen {
    Redfield(RedfieldGenerator),
    Lindblad(LindbladGenerator),
}

impl Frozen {
    fn apply(&self, rho: &CMatrix) -> CMatrix {
        match self {
            Frozen::Redfield(g) => g.apply(0.0, rho),
            Frozen::Lindblad(g) => g.apply(0.0, rho),
        }
    }
}

/// Any of the generators built at a single time.
pub fn build_generator(
    kind: GeneratorKind,
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
) -> Result<Box<dyn MasterEquation>> {
    Ok(match build_frozen(kind, channels, spectrum, t)? {
        Frozen::Redfield(g) => Box::new(g),
        Frozen::Lindblad(g) => Box::new(g),
    })
}

fn build_frozen(
    kind: GeneratorKind,
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
) -> Result<Frozen> {
    let convs = convolutions(channels, spectrum, t)?;
    frozen_from(kind, spectrum, channels, convs, t)
}

fn frozen_from(
    kind: GeneratorKind,
    spectrum: &SpectrumDecomposition,
    channels: &[BathChannel],
    convs: Vec<CMatrix>,
    t: f64,
) -> Result<Frozen> {
    Ok(match kind {
        GeneratorKind::Redfield => {
            Frozen::Redfield(RedfieldGenerator::assemble(spectrum, channels, convs, t))
        }
        GeneratorKind::Rwa => Frozen::Lindblad(rwa_from(spectrum, channels, &convs, t)?),
        GeneratorKind::PseudoLindblad(tr) => {
            Frozen::Lindblad(lindblad_from(spectrum, channels, &convs, tr, true)?)
        }
        GeneratorKind::Truncated(tr) => {
            Frozen::Lindblad(lindblad_from(spectrum, channels, &convs, tr, false)?)
        }
    })
}

/// Generator whose convolution operators follow `𝕏_t` in time. Beyond the
/// bath memory time it coincides with the stationary generator.
pub struct TimeDependentGenerator {
    kind: GeneratorKind,
    channels: Vec<BathChannel>,
    spectrum: SpectrumDecomposition,
    filters: Vec<FilterTable>,
    stationary: Frozen,
    settle: f64,
}

impl TimeDependentGenerator {
    pub fn new(
        kind: GeneratorKind,
        channels: Vec<BathChannel>,
        spectrum: SpectrumDecomposition,
    ) -> Result<Self> {
        for ch in &channels {
            check_dim(ch, &spectrum)?;
        }
        let filters: Vec<FilterTable> = channels
            .iter()
            .map(|c| FilterTable::new(c, &spectrum, true))
            .collect();
        let convs = filters
            .iter()
            .zip(&channels)
            .map(|(f, c)| f.convolution(c, f64::INFINITY))
            .collect();
        let stationary = frozen_from(kind, &spectrum, &channels, convs, f64::INFINITY)?;
        let settle = channels
            .iter()
            .map(|c| c.corr.memory_time())
            .fold(0.0, f64::max);
        Ok(Self {
            kind,
            channels,
            spectrum,
            filters,
            stationary,
            settle,
        })
    }

    /// Generator frozen at time `t`.
    pub fn at(&self, t: f64) -> Result<Box<dyn MasterEquation>> {
        let convs = self
            .filters
            .iter()
            .zip(&self.channels)
            .map(|(f, c)| f.convolution(c, t))
            .collect();
        Ok(
            match frozen_from(self.kind, &self.spectrum, &self.channels, convs, t)? {
                Frozen::Redfield(g) => Box::new(g),
                Frozen::Lindblad(g) => Box::new(g),
            },
        )
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    /// Time after which the generator is stationary.
    pub fn memory_time(&self) -> f64 {
        self.settle
    }
}

impl MasterEquation for TimeDependentGenerator {
    fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    fn apply(&self, t: f64, rho: &CMatrix) -> CMatrix {
        if t > self.settle {
            return self.stationary.apply(rho);
        }
        let t = t.max(0.0);
        let convs = self
            .filters
            .iter()
            .zip(&self.channels)
            .map(|(f, c)| f.convolution(c, t))
            .collect();
        match frozen_from(self.kind, &self.spectrum, &self.channels, convs, t) {
            Ok(g) => g.apply(rho),
            // only reachable for parameters that already failed at t = ∞
            Err(e) => panic!("generator rebuild failed at t = {t}: {e}"),
        }
    }

    fn is_time_dependent(&self) -> bool {
        true
    }
}

/// Dense `dim² × dim²` matrix of a generator, acting on column-stacked `ρ`.
pub fn superoperator(gen: &dyn MasterEquation, t: f64, exec: Execution) -> CMatrix {
    let dim = gen.dim();
    let n = dim * dim;
    let columns = exec.map(n, |j| {
        let mut unit = linalg::zeros(dim);
        unit[(j % dim, j / dim)] = ONE;
        gen.apply(t, &unit)
    });
    let mut out = CMatrix::zeros(n, n);
    for (j, col) in columns.into_iter().enumerate() {
        out.column_mut(j).copy_from_slice(col.as_slice());
    }
    out
}

pub fn redfield_superoperator(
    channels: &[BathChannel],
    spectrum: &SpectrumDecomposition,
    t: f64,
) -> Result<CMatrix> {
    let gen = RedfieldGenerator::new(channels, spectrum, t)?;
    Ok(superoperator(&gen, t, Execution::Sequential))
}

/// `V[Δ] = Σ|X_qk|²Δ_qk² − (Σ|X_qk|²Δ_qk)²` for a normalized operator.
pub fn splitting_variance(op: &CMatrix, spectrum: &SpectrumDecomposition) -> f64 {
    let dim = spectrum.dim();
    let norm = linalg::frobenius_sq(op);
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for k in 0..dim {
        for q in 0..dim {
            let w = op[(q, k)].norm_sqr() / norm;
            let d = spectrum.splitting(q, k);
            m1 += w * d;
            m2 += w * d * d;
        }
    }
    m2 - m1 * m1
}

/// High-temperature estimate of `‖A⁻‖²/‖A⁺‖²`: `[1/16 + χ²/2] β² V[Δ]`.
pub fn relative_weight_expansion(beta: f64, cutoff: f64, variance: f64) -> Result<f64> {
    let chi = crate::bath::chi(beta * cutoff)?;
    Ok((1.0 / 16.0 + 0.5 * chi * chi) * beta * beta * variance)
}
