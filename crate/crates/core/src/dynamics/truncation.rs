// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Fock truncation sized from the Gaussian moments of each mode.
//!
//! Every single-mode reduced state of the Gaussian-representable initial
//! states is displaced thermal, so its photon-number distribution is known
//! exactly and the truncation can be chosen before integrating.

use super::gaussian::{gaussian_evolve, GaussianMoments};
use super::{DynamicsError, InitialState, UnitMoments};
use crate::fockspace::DEFAULT_TAIL_BOUND;
use crate::params::EnbsParams;

/// Default bound on the population beyond the last kept level but one.
pub const DEFAULT_DIM_TAIL: f64 = 1e-9;

const MAX_LEVELS: usize = 2000;
// an added photon shifts the distribution by one level and widens it
const SPACS_MARGIN: usize = 3;

/// `P(0), …, P(len − 1)` of a displaced thermal state with thermal
/// occupation `n_th` and displacement `|d|² = d_sq`.
pub fn displaced_thermal_distribution(n_th: f64, d_sq: f64, len: usize) -> Vec<f64> {
    let n_th = n_th.max(0.0);
    let d_sq = d_sq.max(0.0);
    // q_n = y^n L_n(−x) with y = n̄/(1+n̄), x y = |d|²/(1+n̄)²
    let y = n_th / (1.0 + n_th);
    let xy = d_sq / (1.0 + n_th).powi(2);
    let scale = (-d_sq / (1.0 + n_th)).exp() / (1.0 + n_th);
    let mut out = Vec::with_capacity(len);
    let (mut prev, mut cur) = (0.0, 1.0);
    for n in 0..len {
        out.push(cur * scale);
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * y * cur + xy * cur - nf * y * y * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    out
}

/// Smallest dimension whose top level and everything above it carry at
/// most `tail` of the distribution.
pub fn dim_for_tail(n_th: f64, d_sq: f64, tail: f64) -> usize {
    let p = displaced_thermal_distribution(n_th, d_sq, MAX_LEVELS);
    let mut above = 0.0;
    let mut dim = MAX_LEVELS;
    for (n, &pn) in p.iter().enumerate().rev() {
        above += pn;
        if above > tail {
            break;
        }
        dim = n + 1;
    }
    dim.max(2)
}

fn mode_dim(mean_sq: f64, n: f64, tail: f64) -> usize {
    dim_for_tail(n - mean_sq, mean_sq, tail)
}

fn unit_dims(units: &UnitMoments, tail: f64) -> [usize; 2] {
    [
        mode_dim(units.signal_mean.norm_sqr(), units.signal_n, tail),
        mode_dim(units.idler_mean.norm_sqr(), units.idler_n, tail),
    ]
}

/// Per-unit `[signal, idler]` dimensions keeping the truncated population
/// below `tail` at every grid time, from the exact Gaussian moments. SPACS
/// idlers are sized from the coherent-idler moments plus a fixed margin.
/// The initial time also honours the bound the initial states are built with.
pub fn suggested_unit_dims(
    kind: InitialState,
    params: &EnbsParams,
    t_grid: &[f64],
    tail: f64,
) -> Result<[[usize; 2]; 2], DynamicsError> {
    let (gauss_kind, margin) = match kind {
        InitialState::SpacsIdler => (InitialState::VacuumSignal, SPACS_MARGIN),
        other => (other, 0),
    };
    let initial = GaussianMoments::initial(gauss_kind, params)?;
    let mut times = vec![0.0];
    times.extend(t_grid.iter().copied().filter(|&t| t > 0.0));
    let run = gaussian_evolve(&initial, params, &times)?;
    let mut dims = [[2usize; 2]; 2];
    for (k, point) in run.observables.iter().enumerate() {
        let bound = if k == 0 {
            tail.min(DEFAULT_TAIL_BOUND)
        } else {
            tail
        };
        for (unit, d) in point.units.iter().zip(dims.iter_mut()) {
            let [s, i] = unit_dims(unit, bound);
            d[0] = d[0].max(s + margin);
            d[1] = d[1].max(i + margin);
        }
    }
    Ok(dims)
}
