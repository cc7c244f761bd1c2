// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive Dormand–Prince 5(4) integrator with continuous (dense) output,
//! for complex matrix-valued ODEs `dy/dt = f(t, y)`.

use crate::error::{OqsError, Result};
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Linear combination `y + h Σ a_i k_i`.
fn combine(y: &CMatrix, h: f64, terms: &[(f64, &CMatrix)]) -> CMatrix {
    let mut out = y.clone();
    for &(a, k) in terms {
        if a != 0.0 {
            out.zip_apply(k, |o, ki| *o += ki * (a * h));
        }
    }
    out
}

/// Stepper state; after each accepted step the interval `[t_prev, t]` can be
/// interpolated with [`Dopri5::dense`].
pub struct Dopri5<F>
where
    F: FnMut(f64, &CMatrix) -> CMatrix,
{
    f: F,
    opts: OdeOptions,
    t: f64,
    y: CMatrix,
    k1: CMatrix,
    h: f64,
    t_prev: f64,
    cont: [CMatrix; 5],
    steps: usize,
    rejected: usize,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &CMatrix) -> CMatrix,
{
    pub fn new(mut f: F, t0: f64, y0: CMatrix, opts: OdeOptions) -> Self {
        let k1 = f(t0, &y0);
        let cont = std::array::from_fn(|_| y0.clone());
        let mut s = Self {
            f,
            opts,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            t_prev: t0,
            cont,
            steps: 0,
            rejected: 0,
        };
        s.h = match opts.h_init {
            Some(h) => h,
            None => s.initial_step(),
        };
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &CMatrix {
        &self.y
    }

    pub fn previous_time(&self) -> f64 {
        self.t_prev
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Restart from a new state at time `t` (e.g. after a jump).
    pub fn restart(&mut self, t: f64, y: CMatrix) {
        self.t = t;
        self.k1 = (self.f)(self.t, &y);
        self.y = y;
        self.t_prev = self.t;
        self.cont = std::array::from_fn(|_| self.y.clone());
    }

    fn error_norm(&self, y_old: &CMatrix, y_new: &CMatrix, err: &CMatrix) -> f64 {
        let n = err.len().max(1) as f64;
        let sum: f64 = err
            .iter()
            .zip(y_old.iter().zip(y_new.iter()))
            .map(|(e, (a, b))| {
                let sc = self.opts.atol + self.opts.rtol * a.norm().max(b.norm());
                (e.norm() / sc).powi(2)
            })
            .sum();
        (sum / n).sqrt()
    }

    fn scaled_norm(&self, v: &CMatrix) -> f64 {
        let n = v.len().max(1) as f64;
        let sum: f64 = v
            .iter()
            .zip(self.y.iter())
            .map(|(e, y)| {
                let sc = self.opts.atol + self.opts.rtol * y.norm();
                (e.norm() / sc).powi(2)
            })
            .sum();
        (sum / n).sqrt()
    }

    fn initial_step(&mut self) -> f64 {
        let d0 = self.scaled_norm(&self.y);
        let d1 = self.scaled_norm(&self.k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(self.opts.h_max);
        let y1 = combine(&self.y, h0, &[(1.0, &self.k1)]);
        let k = (self.f)(self.t + h0, &y1);
        let d2 = self.scaled_norm(&(k - &self.k1)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.opts.h_max)
    }

    /// Takes one accepted step, never passing `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<()> {
        loop {
            if self.steps + self.rejected >= self.opts.max_steps {
                return Err(OqsError::Stiffness { t: self.t });
            }
            let remaining = t_stop - self.t;
            let mut h = self.h.min(self.opts.h_max);
            let clamped = h >= remaining;
            if clamped {
                h = remaining;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) && !clamped {
                return Err(OqsError::Stiffness { t: self.t });
            }
            let t = self.t;
            let y = &self.y;
            let k1 = &self.k1;
            let k2 = (self.f)(t + C2 * h, &combine(y, h, &[(A21, k1)]));
            let k3 = (self.f)(t + C3 * h, &combine(y, h, &[(A31, k1), (A32, &k2)]));
            let k4 = (self.f)(
                t + C4 * h,
                &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = (self.f)(
                t + C5 * h,
                &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = (self.f)(
                t + h,
                &combine(
                    y,
                    h,
                    &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = combine(
                y,
                h,
                &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t_new = if clamped { t_stop } else { t + h };
            let k7 = (self.f)(t_new, &y_new);
            let err = combine(
                &linalg::zeros_like(y),
                h,
                &[
                    (E1, k1),
                    (E3, &k3),
                    (E4, &k4),
                    (E5, &k5),
                    (E6, &k6),
                    (E7, &k7),
                ],
            );
            let en = self.error_norm(y, &y_new, &err);
            if !en.is_finite() {
                self.rejected += 1;
                self.h = 0.1 * h;
                continue;
            }
            if en <= 1.0 {
                let ydiff = &y_new - y;
                let bspl = k1 * linalg::real(h) - &ydiff;
                let r3 = &ydiff - &k7 * linalg::real(h) - &bspl;
                let r4 = combine(
                    &linalg::zeros_like(y),
                    h,
                    &[
                        (D1, k1),
                        (D3, &k3),
                        (D4, &k4),
                        (D5, &k5),
                        (D6, &k6),
                        (D7, &k7),
                    ],
                );
                self.cont = [y.clone(), ydiff, bspl, r3, r4];
                self.t_prev = t;
                self.t = t_new;
                self.y = y_new;
                self.k1 = k7;
                self.steps += 1;
                let factor = if en == 0.0 {
                    5.0
                } else {
                    (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a clamped step says nothing about the natural step size
                if !clamped || factor < 1.0 {
                    self.h = h * factor;
                }
                return Ok(());
            }
            self.rejected += 1;
            self.h = h * (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
        }
    }

    /// Fifth-order interpolant on the last accepted step.
    pub fn dense(&self, t: f64) -> CMatrix {
        let h = self.t - self.t_prev;
        if h == 0.0 {
            return self.y.clone();
        }
        let th = (t - self.t_prev) / h;
        let th1 = 1.0 - th;
        let [r0, r1, r2, r3, r4] = &self.cont;
        let mut out = r4 * linalg::real(th1);
        out += r3;
        out *= linalg::real(th);
        out += r2;
        out *= linalg::real(th1);
        out += r1;
        out *= linalg::real(th);
        out += r0;
        out
    }
}

/// Integrates from `t0` and records `y` at every grid point (the grid must be
/// nondecreasing and start at or after `t0`). Steps land exactly on the grid.
pub fn integrate<F>(
    f: F,
    t0: f64,
    y0: CMatrix,
    grid: &[f64],
    opts: OdeOptions,
) -> Result<Vec<CMatrix>>
where
    F: FnMut(f64, &CMatrix) -> CMatrix,
{
    let mut out = Vec::with_capacity(grid.len());
    let mut stepper = Dopri5::new(f, t0, y0, opts);
    for &tg in grid {
        if tg < stepper.t() {
            return Err(OqsError::InvalidParameter(
                "output grid must be nondecreasing and start at t0".into(),
            ));
        }
        while stepper.t() < tg {
            stepper.step(tg)?;
        }
        out.push(stepper.y().clone());
    }
    Ok(out)
}
