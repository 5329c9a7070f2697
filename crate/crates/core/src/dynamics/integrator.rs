// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive classical Runge–Kutta and a dense matrix exponential.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Vector-space operations needed by [`integrate`].
pub trait OdeState: Clone {
    /// `self += a · x`.
    fn axpy(&mut self, a: f64, x: &Self);
    /// Largest entrywise modulus of `self − other`.
    fn max_abs_diff(&self, other: &Self) -> f64;
}

impl OdeState for Array1<Complex64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.zip_mut_with(x, |s, v| *s += v * a);
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

impl OdeState for Array2<Complex64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.zip_mut_with(x, |s, v| *s += v * a);
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Step-size control for [`integrate`]. Times are in the integrator's own
/// (dimensionless) units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Local error allowed per unit time.
    pub tolerance: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            initial_step: 1e-2,
            min_step: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFailure {
    StepTooSmall { time: f64, step: f64 },
    TooManySteps { time: f64, steps: usize },
}

fn rk4<S: OdeState>(f: &impl Fn(&S) -> S, y: &S, k1: &S, h: f64) -> S {
    let mut tmp = y.clone();
    tmp.axpy(h / 2.0, k1);
    let k2 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(h / 2.0, &k2);
    let k3 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(h, &k3);
    let k4 = f(&tmp);
    let mut out = y.clone();
    out.axpy(h / 6.0, k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    out
}

/// Integrate `dy/dt = f(y)` from `t = 0`, calling `observe(i, &y)` at each
/// grid time `grid[i]` (nondecreasing, nonnegative). Error is estimated by
/// step doubling; accepted steps keep the two-half-step result. Returns the
/// number of accepted steps.
pub fn integrate<S, F, O, E>(
    f: F,
    y0: S,
    grid: &[f64],
    control: &StepControl,
    mut observe: O,
) -> Result<usize, E>
where
    S: OdeState,
    F: Fn(&S) -> S,
    O: FnMut(usize, &S) -> Result<(), E>,
    E: From<StepFailure>,
{
    let mut y = y0;
    let mut t = 0.0;
    let mut h = control.initial_step;
    let mut steps = 0usize;
    for (i, &target) in grid.iter().enumerate() {
        let mut k1 = None;
        while t < target {
            let slope = k1.get_or_insert_with(|| f(&y));
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let full = rk4(&f, &y, slope, step);
            let half = rk4(&f, &y, slope, step / 2.0);
            let two_half = rk4(&f, &half, &f(&half), step / 2.0);
            let err = two_half.max_abs_diff(&full) / 15.0;
            let allowed = control.tolerance * step;
            if err <= allowed {
                y = two_half;
                k1 = None;
                t = if last { target } else { t + step };
                steps += 1;
                if steps > control.max_steps {
                    return Err(StepFailure::TooManySteps { time: t, steps }.into());
                }
            }
            let factor = if err == 0.0 {
                2.0
            } else {
                (0.9 * (allowed / err).powf(0.25)).clamp(0.2, 2.0)
            };
            // a shortened final step says nothing about the next one
            if !(last && err <= allowed) || factor < 1.0 {
                h = step * factor;
            }
            if h < control.min_step {
                return Err(StepFailure::StepTooSmall { time: t, step: h }.into());
            }
        }
        observe(i, &y)?;
    }
    Ok(steps)
}

fn inf_norm(m: &Array2<Complex64>) -> f64 {
    m.rows()
        .into_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor series.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let norm = inf_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings));
    let mut sum = Array2::<Complex64>::eye(n);
    let mut term = Array2::<Complex64>::eye(n);
    for k in 1..60 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        sum += &term;
        if inf_norm(&term) <= 1e-18 * inf_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}
