// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, OqsError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OqsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "degenerate cutoff: beta*Ec = {xi} collides with Matsubara pole 2*pi*{pole}; \
         perturb Ec or the temperature slightly"
    )]
    DegenerateCutoff { xi: f64, pole: usize },

    #[error("degenerate decomposition: {0}")]
    DegenerateDecomposition(String),

    #[error("degenerate steady state: {0}")]
    DegenerateSteadyState(String),

    #[error("step size underflow at t = {t} (stiff problem or tolerance too tight)")]
    Stiffness { t: f64 },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("Fock truncation insufficient: n_max = {n_max}, need at least {required} at T = {temperature}")]
    FockTruncation {
        n_max: usize,
        required: usize,
        temperature: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
