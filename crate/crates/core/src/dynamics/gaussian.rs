// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact first- and second-moment evolution.
//!
//! With `ξ = (a_1 … a_M, a_1† … a_M†)` the model gives closed linear
//! equations
//!
//! ```text
//! d⟨ξ⟩/dt      = D ⟨ξ⟩
//! d⟨ξ_i ξ_j⟩/dt = Σ_l D_il ⟨ξ_l ξ_j⟩ + Σ_l D_jl ⟨ξ_i ξ_l⟩ + N_ij
//! ```
//!
//! where `N` holds the vacuum-noise terms `N[k, M+k] = κ_k`. The system is
//! propagated with one matrix exponential per grid time, so there is no
//! step-size error.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use super::{
    check_grid, g2_from_balanced, BackendPoint, Diagnostics, DynamicsError, EvolutionResult,
    FinalState, InitialState, UnitMoments,
};
use crate::dynamics::integrator::expm;
use crate::params::{Arm, EnbsParams};

const MODES: usize = 4;

/// Moments of a multimode state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    /// `⟨ξ_i⟩`, length `2M`.
    pub mean: Array1<Complex64>,
    /// `⟨ξ_i ξ_j⟩`, shape `2M × 2M`.
    pub second: Array2<Complex64>,
}

impl GaussianMoments {
    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// Product of coherent states `|β_k⟩`.
    pub fn coherent(amplitudes: &[Complex64]) -> Self {
        let m = amplitudes.len();
        let mut mean = Array1::zeros(2 * m);
        for (k, b) in amplitudes.iter().enumerate() {
            mean[k] = *b;
            mean[m + k] = b.conj();
        }
        let mut second = Array2::from_shape_fn((2 * m, 2 * m), |(i, j)| mean[i] * mean[j]);
        for k in 0..m {
            second[[k, m + k]] += 1.0;
        }
        Self { mean, second }
    }

    /// Four-mode initial moments for both units. SPACS idlers have no
    /// Gaussian representation.
    pub fn initial(kind: InitialState, params: &EnbsParams) -> Result<Self, DynamicsError> {
        let a1 = params.seed_1.amplitude();
        let a2 = params.seed_2.amplitude();
        match kind {
            InitialState::VacuumSignal => Ok(Self::coherent(&[
                Complex64::new(0.0, 0.0),
                a1,
                Complex64::new(0.0, 0.0),
                a2,
            ])),
            InitialState::CoherentSignal => Ok(Self::coherent(&[a1, a1, a2, a2])),
            InitialState::SpacsIdler => Err(DynamicsError::NonGaussian),
        }
    }

    /// Largest violation of the canonical commutation relations and of the
    /// Hermitian pairing `⟨a_i† a_j⟩ = ⟨a_j† a_i⟩*`.
    pub fn invariant_error(&self) -> f64 {
        let m = self.n_modes();
        let s = &self.second;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s[[i, m + j]] - s[[m + j, i]] - delta).norm());
                worst = worst.max((s[[i, j]] - s[[j, i]]).norm());
                worst = worst.max((s[[m + i, j]] - s[[m + j, i]].conj()).norm());
            }
            worst = worst.max((self.mean[m + i] - self.mean[i].conj()).norm());
        }
        worst
    }

    fn cov(&self, i: usize, j: usize) -> Complex64 {
        self.second[[i, j]] - self.mean[i] * self.mean[j]
    }

    /// `⟨ξ_i ξ_j ξ_k ξ_l⟩` by Wick expansion about the means.
    pub fn fourth(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        let m = &self.mean;
        let c = |p, q| self.cov(p, q);
        m[i] * m[j] * m[k] * m[l]
            + c(i, j) * m[k] * m[l]
            + c(i, k) * m[j] * m[l]
            + c(i, l) * m[j] * m[k]
            + c(j, k) * m[i] * m[l]
            + c(j, l) * m[i] * m[k]
            + c(k, l) * m[i] * m[j]
            + c(i, j) * c(k, l)
            + c(i, k) * c(j, l)
            + c(i, l) * c(j, k)
    }

    fn unit(&self, signal: usize, idler: usize) -> UnitMoments {
        let m = self.n_modes();
        let (s, sd, i, id) = (signal, m + signal, idler, m + idler);
        UnitMoments {
            signal_mean: self.mean[s],
            signal_sq: self.second[[s, s]],
            signal_n: self.second[[sd, s]].re,
            signal_n2: self.fourth(sd, sd, s, s).re,
            idler_mean: self.mean[i],
            idler_n: self.second[[id, i]].re,
            pair: self.second[[s, i]],
        }
    }
}

/// Drift matrix `D` for the four-mode model.
pub fn drift_matrix(params: &EnbsParams) -> Array2<Complex64> {
    let m = MODES;
    let g = params.g_eff_mag;
    let mut d = Array2::zeros((2 * m, 2 * m));
    for arm in Arm::BOTH {
        let s = 2 * arm.index();
        let i = s + 1;
        let e = Complex64::from_polar(1.0, params.pump_phase(arm));
        let minus_ig = Complex64::new(0.0, -g) * e;
        // dA = −κ_s/2 A − i g e^{iφ} a†,  da = −κ_i/2 a − i g e^{iφ} A†
        d[[s, s]] = Complex64::new(-params.kappa_s / 2.0, 0.0);
        d[[s, m + i]] = minus_ig;
        d[[i, i]] = Complex64::new(-params.kappa_i / 2.0, 0.0);
        d[[i, m + s]] = minus_ig;
        d[[m + s, m + s]] = Complex64::new(-params.kappa_s / 2.0, 0.0);
        d[[m + s, i]] = minus_ig.conj();
        d[[m + i, m + i]] = Complex64::new(-params.kappa_i / 2.0, 0.0);
        d[[m + i, s]] = minus_ig.conj();
    }
    d
}

/// Generator of the augmented linear system acting on
/// `[⟨ξ⟩, vec⟨ξξ⟩, 1]` (row-major vectorization).
fn augmented_generator(params: &EnbsParams) -> Array2<Complex64> {
    let n = 2 * MODES;
    let d = drift_matrix(params);
    let size = n + n * n + 1;
    let one = size - 1;
    let mut l = Array2::zeros((size, size));
    for i in 0..n {
        for j in 0..n {
            l[[i, j]] = d[[i, j]];
        }
    }
    for i in 0..n {
        for j in 0..n {
            let row = n + i * n + j;
            for k in 0..n {
                l[[row, n + k * n + j]] += d[[i, k]];
                l[[row, n + i * n + k]] += d[[j, k]];
            }
        }
    }
    for arm in Arm::BOTH {
        let s = 2 * arm.index();
        let i = s + 1;
        l[[n + s * n + (MODES + s), one]] = Complex64::new(params.kappa_s, 0.0);
        l[[n + i * n + (MODES + i), one]] = Complex64::new(params.kappa_i, 0.0);
    }
    l
}

fn propagate(generator: &Array2<Complex64>, t: f64, initial: &GaussianMoments) -> GaussianMoments {
    let n = 2 * MODES;
    let mut y = Array1::zeros(n + n * n + 1);
    for i in 0..n {
        y[i] = initial.mean[i];
        for j in 0..n {
            y[n + i * n + j] = initial.second[[i, j]];
        }
    }
    y[n + n * n] = Complex64::new(1.0, 0.0);
    let prop = expm(&generator.mapv(|z| z * t));
    let out = prop.dot(&y);
    GaussianMoments {
        mean: Array1::from_shape_fn(n, |i| out[i]),
        second: Array2::from_shape_fn((n, n), |(i, j)| out[n + i * n + j]),
    }
}

/// Backend observables from joint four-mode moments. The coincidence and
/// cross terms use the full joint moments rather than product structure.
pub fn point_from_moments(time: f64, mom: &GaussianMoments, params: &EnbsParams) -> BackendPoint {
    let m = MODES;
    let units = [mom.unit(0, 1), mom.unit(2, 3)];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r1 = Complex64::from_polar(h, -params.signal_phase_1);
    let r2 = Complex64::from_polar(h, -params.signal_phase_2);
    // A± = u±_0 a_0 + u±_2 a_2
    let plus = [(0usize, r1), (2usize, r2)];
    let minus = [(0usize, r1), (2usize, -r2)];
    let mut coincidence = Complex64::new(0.0, 0.0);
    for &(a, ua) in &plus {
        for &(b, ub) in &minus {
            for &(c, uc) in &minus {
                for &(d, ud) in &plus {
                    coincidence += ua.conj() * ub.conj() * uc * ud * mom.fourth(m + a, m + b, c, d);
                }
            }
        }
    }
    let intensity = |u: &[(usize, Complex64); 2]| -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, ua) in u {
            for &(b, ub) in u {
                acc += ua.conj() * ub * mom.second[[m + a, b]];
            }
        }
        acc.re
    };
    BackendPoint {
        time,
        n_sig_1: units[0].signal_n,
        n_sig_2: units[1].signal_n,
        g2: g2_from_balanced(coincidence.re, intensity(&plus), intensity(&minus)),
        cross: mom.second[[m, 2]],
        units,
        trace_error: 0.0,
        truncation_tail: 0.0,
    }
}

/// Propagate four-mode moments to each grid time.
pub fn gaussian_evolve(
    initial: &GaussianMoments,
    params: &EnbsParams,
    t_grid: &[f64],
) -> Result<EvolutionResult, DynamicsError> {
    check_grid(t_grid)?;
    if initial.n_modes() != MODES || initial.second.dim() != (2 * MODES, 2 * MODES) {
        return Err(DynamicsError::InvalidGrid(format!(
            "expected {MODES}-mode moments, got {}",
            initial.n_modes()
        )));
    }
    let generator = augmented_generator(params);
    let mut observables = Vec::with_capacity(t_grid.len());
    let mut last = initial.clone();
    for &t in t_grid {
        last = propagate(&generator, t, initial);
        observables.push(point_from_moments(t, &last, params));
    }
    Ok(EvolutionResult {
        times: t_grid.to_vec(),
        observables,
        final_state: FinalState::Gaussian(last),
        diagnostics: Diagnostics::default(),
    })
}
