// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Quadrature of `(1/π)∫ dω J(ω)/(e^{βω} − 1) · (e^{i(ω−Δ)t} − 1)/(i(ω−Δ))`
//! for the Drude density.

use std::f64::consts::PI;

pub const GAMMA: f64 = 0.2;
pub const EC: f64 = 17.0;
/// Lower frequency cutoff of the numerical integrals.
pub const W: f64 = 2.0e4;

fn occupied_density(w: f64, beta: f64) -> f64 {
    let j = GAMMA * w / (1.0 + (w / EC).powi(2));
    if (beta * w).abs() < 1e-8 {
        GAMMA / beta
    } else {
        j / (beta * w).exp_m1()
    }
}

/// `∫_{−∞}^{−W} J(|ω|)/(ω − Δ) dω` in closed form.
fn left_tail(delta: f64) -> f64 {
    let e2 = EC * EC;
    let a = -delta / (delta * delta + e2);
    let c = e2 / (delta * delta + e2);
    let logs = (W + delta).ln() - 0.5 * (W * W + e2).ln();
    -GAMMA * e2 * (-a * logs + c / EC * (0.5 * PI - (W / EC).atan()))
}

fn upper(beta: f64, delta: f64) -> f64 {
    delta.abs() + 60.0 / beta + 50.0
}

pub fn oracle_finite(delta: f64, t: f64, beta: f64) -> (f64, f64) {
    let top = upper(beta, delta);
    let panel = (2.0 * PI / t).min(5.0);
    let re = super::integrate(
        |w| {
            let x = w - delta;
            let k = if x.abs() < 1e-12 {
                t
            } else {
                (x * t).sin() / x
            };
            occupied_density(w, beta) * k
        },
        -W,
        top,
        panel,
        1e-11,
    );
    let im = super::integrate(
        |w| {
            let x = w - delta;
            let k = if x.abs() < 1e-12 {
                0.0
            } else {
                (1.0 - (x * t).cos()) / x
            };
            occupied_density(w, beta) * k
        },
        -W,
        top,
        panel,
        1e-11,
    );
    (re / PI, (im + left_tail(delta)) / PI)
}

pub fn oracle_stationary(delta: f64, beta: f64) -> (f64, f64) {
    let top = upper(beta, delta);
    let r = 1.0;
    let f = |w: f64| occupied_density(w, beta);
    let near = super::integrate(|u| (f(delta + u) - f(delta - u)) / u, 0.0, r, 0.5, 1e-12);
    let left = super::integrate(|w| f(w) / (w - delta), -W, delta - r, 50.0, 1e-11);
    let right = super::integrate(|w| f(w) / (w - delta), delta + r, top, 50.0, 1e-11);
    (f(delta), (near + left + right + left_tail(delta)) / PI)
}
