// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! First-principles time evolution of the two-unit source.
//!
//! Two backends solve the same open-system model (two-mode squeezing per
//! unit, signal and idler amplitude damping):
//!
//! - [`gaussian`]: exact propagation of first and second moments,
//! - [`lindblad`]: master-equation integration in truncated Fock space.
//!
//! Mode order for four-mode objects is `[signal 1, idler 1, signal 2,
//! idler 2]`.
//!
//! The backend g² is the zero-delay coincidence rate between the two
//! outputs of a balanced beam splitter combining the phase-shifted signals
//! `B_j = e^{−iφ_s,j} A_j`, normalized by the product of the output
//! intensities. For two independent units with equal gain and damping the
//! thermal parts of the two signals are identical, the connected output
//! covariance vanishes and this g² is exactly 1 whatever the seeds; it only
//! departs from 1 for photon-added idlers. The per-unit signal
//! autocorrelation `⟨A†²A²⟩/⟨A†A⟩²` is the nontrivial comparison.

pub mod gaussian;
pub mod integrator;
pub mod lindblad;
pub mod supermode;
pub mod truncation;

use std::io::{self, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::analytic::G2Value;
use crate::fockspace::{FockError, FockRegister};
use crate::params::EnbsParams;

pub use gaussian::{gaussian_evolve, GaussianMoments};
pub use integrator::{StepControl, StepFailure};
pub use lindblad::{
    build_hamiltonian, build_unit_hamiltonian, lindblad_evolve, lindblad_evolve_unit,
    lindblad_evolve_units, EvolveOptions,
};
pub use supermode::{effective_coupling, supermode_coefficients, uniform_bin_couplings};
pub use truncation::{suggested_unit_dims, DEFAULT_DIM_TAIL};

/// Intensities below this count as zero when normalizing g².
pub const G2_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("top-level Fock population {population:.3e} exceeds {limit:.1e} (mode {mode}, t = {time:e} s)")]
    Truncation {
        population: f64,
        limit: f64,
        mode: usize,
        time: f64,
    },
    #[error("step control failed: {0:?}")]
    StepFailure(StepFailure),
    #[error("initial state is not Gaussian")]
    NonGaussian,
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
}

impl From<StepFailure> for DynamicsError {
    fn from(f: StepFailure) -> Self {
        DynamicsError::StepFailure(f)
    }
}

/// Initial state of each unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialState {
    /// Vacuum signal, coherent idler `|α_j⟩`.
    VacuumSignal,
    /// Vacuum signal, photon-added coherent idler.
    SpacsIdler,
    /// Coherent signal `|α_j⟩` and coherent idler `|α_j⟩`.
    CoherentSignal,
}

impl InitialState {
    pub const ALL: [InitialState; 3] = [
        InitialState::VacuumSignal,
        InitialState::SpacsIdler,
        InitialState::CoherentSignal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InitialState::VacuumSignal => "vacuum_signal",
            InitialState::SpacsIdler => "spacs_idler",
            InitialState::CoherentSignal => "coherent_signal",
        }
    }
}

/// Single-unit moments in the native (unrotated) signal operator `A` and
/// idler operator `a`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnitMoments {
    /// `⟨A⟩`
    pub signal_mean: Complex64,
    /// `⟨A²⟩`
    pub signal_sq: Complex64,
    /// `⟨A†A⟩`
    pub signal_n: f64,
    /// `⟨A†²A²⟩`
    pub signal_n2: f64,
    /// `⟨a⟩`
    pub idler_mean: Complex64,
    /// `⟨a†a⟩`
    pub idler_n: f64,
    /// `⟨A a⟩`
    pub pair: Complex64,
}

/// Backend observables at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackendPoint {
    pub time: f64,
    pub n_sig_1: f64,
    pub n_sig_2: f64,
    pub g2: G2Value,
    /// `⟨A_1† A_2⟩`.
    pub cross: Complex64,
    pub units: [UnitMoments; 2],
    pub trace_error: f64,
    pub truncation_tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// Largest `|Tr ρ − 1|` over the sampled times.
    pub trace_error: f64,
    /// Largest Hermiticity defect over the sampled times.
    pub hermiticity_error: f64,
    /// Largest top-level Fock population over the sampled times.
    pub truncation_tail: f64,
    pub step_count: usize,
}

impl Diagnostics {
    pub fn merge(self, other: Diagnostics) -> Diagnostics {
        Diagnostics {
            trace_error: self.trace_error.max(other.trace_error),
            hermiticity_error: self.hermiticity_error.max(other.hermiticity_error),
            truncation_tail: self.truncation_tail.max(other.truncation_tail),
            step_count: self.step_count + other.step_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FinalState {
    /// One register per unit, or a single four-mode register.
    Fock(Vec<FockRegister>),
    Gaussian(GaussianMoments),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub observables: Vec<BackendPoint>,
    pub final_state: FinalState,
    pub diagnostics: Diagnostics,
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<(), DynamicsError> {
    if t_grid.is_empty() {
        return Err(DynamicsError::InvalidGrid("empty".into()));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(DynamicsError::InvalidGrid(
            "times must be finite and nonnegative".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DynamicsError::InvalidGrid(
            "times must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Normalized coincidence `G / (D₊ D₋)` with the divergence convention of
/// the closed form: vanishing intensity gives `Divergent` unless `G` also
/// vanishes.
pub fn g2_from_balanced(coincidence: f64, plus: f64, minus: f64) -> G2Value {
    if plus.min(minus) < G2_FLOOR {
        if coincidence > G2_FLOOR * G2_FLOOR {
            G2Value::Divergent
        } else {
            G2Value::Finite(1.0)
        }
    } else {
        G2Value::Finite(coincidence / (plus * minus))
    }
}

/// Observables of two independent units from their single-unit moments.
pub fn point_from_units(time: f64, units: [UnitMoments; 2], params: &EnbsParams) -> BackendPoint {
    let [u1, u2] = units;
    let r1 = Complex64::from_polar(1.0, -params.signal_phase_1);
    let r2 = Complex64::from_polar(1.0, -params.signal_phase_2);
    let b1 = r1 * u1.signal_mean;
    let b2 = r2 * u2.signal_mean;
    let b1sq = r1 * r1 * u1.signal_sq;
    let b2sq = r2 * r2 * u2.signal_sq;
    let coincidence = (u1.signal_n2 - (b1sq.conj() * b2sq).re * 2.0 + u2.signal_n2) / 4.0;
    let interference = (b1.conj() * b2).re;
    let plus = (u1.signal_n + u2.signal_n + 2.0 * interference) / 2.0;
    let minus = (u1.signal_n + u2.signal_n - 2.0 * interference) / 2.0;
    BackendPoint {
        time,
        n_sig_1: u1.signal_n,
        n_sig_2: u2.signal_n,
        g2: g2_from_balanced(coincidence, plus, minus),
        cross: u1.signal_mean.conj() * u2.signal_mean,
        units,
        trace_error: 0.0,
        truncation_tail: 0.0,
    }
}

/// Write a trajectory as CSV with columns `time_s, n_sig_1, n_sig_2, g2,
/// re_cross, im_cross, trace_error, truncation_tail`. A divergent g² is
/// written as `inf`.
pub fn write_trajectory_csv<W: Write>(result: &EvolutionResult, mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "time_s,n_sig_1,n_sig_2,g2,re_cross,im_cross,trace_error,truncation_tail"
    )?;
    for p in &result.observables {
        let g2 = match p.g2 {
            G2Value::Finite(v) => format!("{v:.16e}"),
            G2Value::Divergent => "inf".to_string(),
        };
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.time,
            p.n_sig_1,
            p.n_sig_2,
            g2,
            p.cross.re,
            p.cross.im,
            p.trace_error,
            p.truncation_tail
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[0.0, 0.0]).is_err());
        assert!(check_grid(&[-1.0]).is_err());
        assert!(check_grid(&[0.0, 1e-12, 2e-12]).is_ok());
    }

    #[test]
    fn balanced_g2_conventions() {
        assert_eq!(g2_from_balanced(0.0, 0.0, 0.0), G2Value::Finite(1.0));
        assert_eq!(g2_from_balanced(1.0, 0.0, 1.0), G2Value::Divergent);
        assert_eq!(g2_from_balanced(2.0, 1.0, 2.0), G2Value::Finite(1.0));
    }

    #[test]
    fn coherent_units_are_uncorrelated() {
        // coherent signals: ⟨B†²B²⟩ = |β|⁴, ⟨B²⟩ = β²
        let unit = |b: Complex64| UnitMoments {
            signal_mean: b,
            signal_sq: b * b,
            signal_n: b.norm_sqr(),
            signal_n2: b.norm_sqr().powi(2),
            ..UnitMoments::default()
        };
        let p = EnbsParams::default();
        let pt = point_from_units(
            0.0,
            [
                unit(Complex64::new(1.0, 0.5)),
                unit(Complex64::new(0.3, -0.2)),
            ],
            &p,
        );
        let g2 = pt.g2.finite().unwrap();
        assert!((g2 - 1.0).abs() < 1e-14, "{g2}");
    }
}
