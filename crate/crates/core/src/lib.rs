// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Open-quantum-system master equations for small, exactly diagonalizable
//! models.
//!
//! The crate builds four generators from the same microscopic input (a
//! system Hamiltonian, coupling operators and Drude–Ohmic baths):
//!
//! * the time-local Redfield equation,
//! * the rotating-wave (secular, Davies) Lindblad equation,
//! * the exact pseudo-Lindblad rewriting of the Redfield dissipator with two
//!   jump operators per channel, one of them carrying a negative rate,
//! * the truncated Lindblad equation obtained by dropping the negative jump
//!   operator after choosing its free parameters so that its weight is
//!   minimal.
//!
//! On top of these sit a density-matrix propagator, a steady-state solver,
//! trace-distance error measures and a Monte-Carlo wave-function engine for
//! the truncated (Lindblad-form) equation.
//!
//! Units: ħ = k_B = 1. Energies are measured in units of the hopping `J`
//! (or `ħΩ` for the oscillator), times in `ħ/J`.

pub mod bath;
pub mod brownian;
pub mod dissipators;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod linalg;
pub mod models;
pub mod ode;
pub mod special;
pub mod trajectories;

pub use error::{OqsError, Result};
pub use linalg::{CMatrix, CVector};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
