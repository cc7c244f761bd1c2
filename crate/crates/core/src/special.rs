// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Special functions needed for closed-form Matsubara remainders.

use num_complex::Complex64;

/// Digamma function for complex arguments away from the poles `0, −1, −2, …`.
pub fn digamma(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.re < 10.0 {
        shift -= z.inv();
        z += 1.0;
    }
    let zi = z.inv();
    let zi2 = zi * zi;
    // Bernoulli asymptotic series up to z^-14.
    let series = zi2
        * (1.0 / 12.0
            - zi2
                * (1.0 / 120.0
                    - zi2
                        * (1.0 / 252.0
                            - zi2
                                * (1.0 / 240.0
                                    - zi2
                                        * (1.0 / 132.0 - zi2 * (691.0 / 32760.0 - zi2 / 12.0))))));
    shift + z.ln() - 0.5 * zi - series
}

/// Trigamma function for real `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 15.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let xi = 1.0 / x;
    let xi2 = xi * xi;
    acc + xi
        + 0.5 * xi2
        + xi * xi2
            * (1.0 / 6.0
                - xi2 * (1.0 / 30.0 - xi2 * (1.0 / 42.0 - xi2 * (1.0 / 30.0 - xi2 * 5.0 / 66.0))))
}

/// Dilogarithm `Li₂(q)` for `q ∈ [0, 1]`.
pub fn dilog_unit(q: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q));
    if q == 1.0 {
        return std::f64::consts::PI.powi(2) / 6.0;
    }
    if q <= 0.5 {
        let mut sum = 0.0f64;
        let mut power = q;
        let mut k = 1.0;
        while power > 1e-18 * sum.max(f64::MIN_POSITIVE) {
            sum += power / (k * k);
            power *= q;
            k += 1.0;
            if k > 200.0 {
                break;
            }
        }
        sum
    } else {
        std::f64::consts::PI.powi(2) / 6.0 - q.ln() * (1.0 - q).ln() - dilog_unit(1.0 - q)
    }
}

/// `Σ_{l > n} q^l / l²` for `q ∈ [0, 1]`.
pub fn dilog_tail(q: f64, n: usize) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let first = (n + 1) as f64;
    if first * q.ln() < -700.0 {
        return 0.0;
    }
    if q <= 0.9 {
        let mut sum = 0.0;
        let mut l = first;
        let mut power = q.powf(first);
        loop {
            let term = power / (l * l);
            sum += term;
            if term <= 1e-18 * sum || term == 0.0 {
                break;
            }
            power *= q;
            l += 1.0;
        }
        sum
    } else {
        let head: f64 = (1..=n)
            .map(|l| {
                let l = l as f64;
                q.powf(l) / (l * l)
            })
            .sum();
        (dilog_unit(q) - head).max(0.0)
    }
}
