// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Master-equation integration in truncated Fock space.
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_L (L ρ L† − ½{L†L, ρ})
//!       = K ρ + (K ρ)† + Σ_L L ρ L†,    K = −iH − ½ Σ_L L†L
//! ```
//!
//! with `H = |g| (e^{iφ_p} A†a† + e^{−iφ_p} A a)` per unit and jumps
//! `√κ_s A`, `√κ_i a`. Time is rescaled by the fastest rate so that the
//! step tolerance is per unit of `1/max(|g|, κ_s, κ_i)`. Closed evolution
//! of a pure state integrates the Schrödinger equation instead.
//!
//! Independent units evolve on their own two-mode registers
//! ([`lindblad_evolve_units`]); [`lindblad_evolve`] integrates all four
//! modes jointly and is only practical at small truncations.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use super::integrator::{integrate, StepControl};
use super::{
    check_grid, g2_from_balanced, point_from_units, BackendPoint, Diagnostics, DynamicsError,
    EvolutionResult, FinalState, InitialState, UnitMoments,
};
use crate::fockspace::{
    coherent_state, expectation, hermiticity_error, spacs, tensor, vacuum, FockData, FockError,
    FockRegister, ModeOperator,
};
use crate::params::{Arm, EnbsParams};
use crate::sparse::CsrMatrix;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub control: StepControl,
    /// Largest top-level Fock population tolerated, relative to the trace.
    pub truncation_limit: f64,
    /// Keep the register at every grid time.
    pub keep_states: bool,
    /// Integrate the density operator even for closed pure evolution.
    pub force_density: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            control: StepControl::default(),
            truncation_limit: 1e-6,
            keep_states: false,
            force_density: false,
        }
    }
}

/// Two-mode squeezing Hamiltonian (rad/s) of one unit on `[signal, idler]`.
pub fn build_unit_hamiltonian(
    g_eff_mag: f64,
    pump_phase: f64,
    dims: [usize; 2],
) -> Result<CsrMatrix, FockError> {
    pair_hamiltonian(g_eff_mag, pump_phase, 0, 1, &dims)
}

fn pair_hamiltonian(
    g: f64,
    phase: f64,
    signal: usize,
    idler: usize,
    dims: &[usize],
) -> Result<CsrMatrix, FockError> {
    let ad_s = ModeOperator::creation(signal, dims[signal]);
    let ad_i = ModeOperator::creation(idler, dims[idler]);
    let create = crate::fockspace::embed_product(&[ad_s, ad_i], dims)?;
    let e = Complex64::from_polar(g, phase);
    Ok(create.linear_combination(e, &create.adjoint(), e.conj()))
}

/// Hamiltonian (rad/s) of both units on `[s1, i1, s2, i2]`.
pub fn build_hamiltonian(params: &EnbsParams, dims: &[usize; 4]) -> Result<CsrMatrix, FockError> {
    let h1 = pair_hamiltonian(params.g_eff_mag, params.pump_phase_1, 0, 1, dims)?;
    let h2 = pair_hamiltonian(params.g_eff_mag, params.pump_phase_2, 2, 3, dims)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(h1.linear_combination(one, &h2, one))
}

/// Master-equation generator in rescaled time.
struct Generator {
    h: CsrMatrix,
    k: CsrMatrix,
    jumps: Vec<CsrMatrix>,
}

impl Generator {
    fn new(h: &CsrMatrix, jumps: &[(f64, CsrMatrix)], rate_scale: f64) -> Self {
        let n = h.nrows();
        let mut k = h.scale(-I / rate_scale);
        let mut scaled = Vec::new();
        for (rate, op) in jumps {
            if *rate == 0.0 {
                continue;
            }
            let l = op.scale(Complex64::new((rate / rate_scale).sqrt(), 0.0));
            let ldl = l.adjoint().matmul(&l);
            k = k.linear_combination(Complex64::new(1.0, 0.0), &ldl, Complex64::new(-0.5, 0.0));
            scaled.push(l);
        }
        debug_assert_eq!(k.nrows(), n);
        Self {
            h: h.scale(Complex64::new(1.0 / rate_scale, 0.0)),
            k,
            jumps: scaled,
        }
    }

    fn is_closed(&self) -> bool {
        self.jumps.is_empty()
    }

    fn density_rhs(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let mut out = self.k.mul_dense(rho);
        self.k.mul_dense_adjoint_right_acc(rho, one, &mut out);
        for l in &self.jumps {
            let lr = l.mul_dense(rho);
            l.mul_dense_adjoint_right_acc(&lr, one, &mut out);
        }
        out
    }

    fn pure_rhs(&self, psi: &Array1<Complex64>) -> Array1<Complex64> {
        self.h.mul_vec(psi).mapv(|z| -I * z)
    }
}

enum State {
    Pure(Array1<Complex64>),
    Density(Array2<Complex64>),
}

fn register(dims: &[usize], state: &State) -> FockRegister {
    match state {
        State::Pure(v) => FockRegister::from_pure_unchecked(dims.to_vec(), v.clone()),
        State::Density(m) => FockRegister::from_density_unchecked(dims.to_vec(), m.clone()),
    }
}

struct Sample {
    register: FockRegister,
    trace_error: f64,
    hermiticity_error: f64,
    tail: f64,
}

/// Integrate one register and hand each grid-time register to `observe`.
fn evolve_register(
    initial: &FockRegister,
    h: &CsrMatrix,
    jumps: &[(f64, CsrMatrix)],
    g_eff_mag: f64,
    t_grid: &[f64],
    opts: &EvolveOptions,
    mut observe: impl FnMut(usize, Sample) -> Result<(), DynamicsError>,
) -> Result<(FockRegister, usize), DynamicsError> {
    check_grid(t_grid)?;
    let dims = initial.mode_dims().to_vec();
    let rate_scale = jumps.iter().map(|(r, _)| *r).fold(g_eff_mag, f64::max);
    // nothing evolves without rates; any positive scale will do
    let rate_scale = if rate_scale > 0.0 { rate_scale } else { 1.0 };
    let gen = Generator::new(h, jumps, rate_scale);
    let tau: Vec<f64> = t_grid.iter().map(|t| t * rate_scale).collect();

    let mut check = |i: usize, state: &State| -> Result<(), DynamicsError> {
        let reg = register(&dims, state);
        let (trace_error, herm) = match state {
            State::Pure(v) => (
                (v.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs(),
                0.0,
            ),
            State::Density(m) => ((m.diag().sum() - 1.0).norm(), hermiticity_error(m)),
        };
        let tops = reg.top_level_populations();
        let (mode, tail) = tops
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |acc, (k, p)| if p > acc.1 { (k, p) } else { acc });
        if tail > opts.truncation_limit * reg.weight() {
            return Err(DynamicsError::Truncation {
                population: tail,
                limit: opts.truncation_limit,
                mode,
                time: t_grid[i],
            });
        }
        observe(
            i,
            Sample {
                register: reg,
                trace_error,
                hermiticity_error: herm,
                tail,
            },
        )
    };

    let use_pure = gen.is_closed() && initial.is_pure() && !opts.force_density;
    let mut last: Option<State> = None;
    let steps = if use_pure {
        let psi = initial.amplitudes().expect("pure").clone();
        integrate(
            |y: &Array1<Complex64>| gen.pure_rhs(y),
            psi,
            &tau,
            &opts.control,
            |i, y| {
                let s = State::Pure(y.clone());
                check(i, &s)?;
                last = Some(s);
                Ok::<(), DynamicsError>(())
            },
        )?
    } else {
        let rho = initial.clone().into_density_matrix();
        integrate(
            |y: &Array2<Complex64>| gen.density_rhs(y),
            rho,
            &tau,
            &opts.control,
            |i, y| {
                let s = State::Density(y.clone());
                check(i, &s)?;
                last = Some(s);
                Ok::<(), DynamicsError>(())
            },
        )?
    };
    let last = last.expect("grid is nonempty");
    Ok((register(&dims, &last), steps))
}

fn unit_moments(reg: &FockRegister, signal: usize, idler: usize) -> Result<UnitMoments, FockError> {
    let dims = reg.mode_dims();
    let a = ModeOperator::annihilation(signal, dims[signal]);
    let ad = a.adjoint();
    let b = ModeOperator::annihilation(idler, dims[idler]);
    let bd = b.adjoint();
    let e = |ops: &[ModeOperator]| expectation(reg, ops);
    Ok(UnitMoments {
        signal_mean: e(std::slice::from_ref(&a))?,
        signal_sq: e(&[a.clone(), a.clone()])?,
        signal_n: e(&[ad.clone(), a.clone()])?.re,
        signal_n2: e(&[ad.clone(), ad, a.clone(), a.clone()])?.re,
        idler_mean: e(std::slice::from_ref(&b))?,
        idler_n: e(&[bd, b.clone()])?.re,
        pair: e(&[a, b])?,
    })
}

/// Per-unit trajectory from [`lindblad_evolve_unit`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitTrajectory {
    pub moments: Vec<UnitMoments>,
    pub trace_errors: Vec<f64>,
    pub tails: Vec<f64>,
    /// Registers at each grid time when requested.
    pub states: Vec<FockRegister>,
    pub final_state: FockRegister,
    pub diagnostics: Diagnostics,
}

/// Evolve one unit on a `[signal, idler]` register.
pub fn lindblad_evolve_unit(
    initial: &FockRegister,
    g_eff_mag: f64,
    pump_phase: f64,
    kappa_s: f64,
    kappa_i: f64,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<UnitTrajectory, DynamicsError> {
    let dims = initial.mode_dims();
    if dims.len() != 2 {
        return Err(FockError::DimensionMismatch(format!(
            "unit register needs 2 modes, got {dims:?}"
        ))
        .into());
    }
    let dims = [dims[0], dims[1]];
    let h = build_unit_hamiltonian(g_eff_mag, pump_phase, dims)?;
    let jumps = [
        (
            kappa_s,
            ModeOperator::annihilation(0, dims[0]).embed_sparse(&dims)?,
        ),
        (
            kappa_i,
            ModeOperator::annihilation(1, dims[1]).embed_sparse(&dims)?,
        ),
    ];
    let mut traj = UnitTrajectory {
        moments: Vec::with_capacity(t_grid.len()),
        trace_errors: Vec::new(),
        tails: Vec::new(),
        states: Vec::new(),
        final_state: initial.clone(),
        diagnostics: Diagnostics::default(),
    };
    let (fin, steps) = evolve_register(initial, &h, &jumps, g_eff_mag, t_grid, opts, |_, s| {
        traj.moments.push(unit_moments(&s.register, 0, 1)?);
        traj.trace_errors.push(s.trace_error);
        traj.tails.push(s.tail);
        traj.diagnostics.trace_error = traj.diagnostics.trace_error.max(s.trace_error);
        traj.diagnostics.hermiticity_error =
            traj.diagnostics.hermiticity_error.max(s.hermiticity_error);
        traj.diagnostics.truncation_tail = traj.diagnostics.truncation_tail.max(s.tail);
        if opts.keep_states {
            traj.states.push(s.register);
        }
        Ok(())
    })?;
    traj.final_state = fin;
    traj.diagnostics.step_count = steps;
    Ok(traj)
}

/// Initial `[signal, idler]` register of one unit.
pub fn unit_initial_state(
    kind: InitialState,
    alpha: Complex64,
    dims: [usize; 2],
) -> Result<FockRegister, FockError> {
    let [ds, di] = dims;
    match kind {
        InitialState::VacuumSignal => tensor(&[&vacuum(ds)?, &coherent_state(alpha, di)?]),
        InitialState::SpacsIdler => tensor(&[&vacuum(ds)?, &spacs(alpha, di)?]),
        InitialState::CoherentSignal => {
            tensor(&[&coherent_state(alpha, ds)?, &coherent_state(alpha, di)?])
        }
    }
}

/// Evolve two independent units and combine their moments. Identical units
/// are integrated once.
pub fn lindblad_evolve_units(
    initial: [&FockRegister; 2],
    params: &EnbsParams,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionResult, DynamicsError> {
    let run = |arm: Arm| {
        lindblad_evolve_unit(
            initial[arm.index()],
            params.g_eff_mag,
            params.pump_phase(arm),
            params.kappa_s,
            params.kappa_i,
            t_grid,
            opts,
        )
    };
    let identical = initial[0] == initial[1] && params.pump_phase_1 == params.pump_phase_2;
    let (u1, u2) = if identical {
        let u = run(Arm::One)?;
        (u.clone(), u)
    } else {
        let (a, b) = rayon::join(|| run(Arm::One), || run(Arm::Two));
        (a?, b?)
    };
    let observables = t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut p = point_from_units(t, [u1.moments[k], u2.moments[k]], params);
            p.trace_error = u1.trace_errors[k].max(u2.trace_errors[k]);
            p.truncation_tail = u1.tails[k].max(u2.tails[k]);
            p
        })
        .collect();
    let mut diagnostics = u1.diagnostics.merge(u2.diagnostics);
    if identical {
        diagnostics.step_count = u1.diagnostics.step_count;
    }
    Ok(EvolutionResult {
        times: t_grid.to_vec(),
        observables,
        final_state: FinalState::Fock(vec![u1.final_state, u2.final_state]),
        diagnostics,
    })
}

fn joint_point(
    time: f64,
    reg: &FockRegister,
    params: &EnbsParams,
) -> Result<BackendPoint, FockError> {
    let dims = reg.mode_dims();
    let units = [unit_moments(reg, 0, 1)?, unit_moments(reg, 2, 3)?];
    let a1 = ModeOperator::annihilation(0, dims[0]);
    let a2 = ModeOperator::annihilation(2, dims[2]);
    let cross = expectation(reg, &[a1.adjoint(), a2.clone()])?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r1 = Complex64::from_polar(h, -params.signal_phase_1);
    let r2 = Complex64::from_polar(h, -params.signal_phase_2);
    let plus = [(&a1, r1), (&a2, r2)];
    let minus = [(&a1, r1), (&a2, -r2)];
    let mut coincidence = Complex64::new(0.0, 0.0);
    for (oa, ua) in &plus {
        for (ob, ub) in &minus {
            for (oc, uc) in &minus {
                for (od, ud) in &plus {
                    let ops = [oa.adjoint(), ob.adjoint(), (*oc).clone(), (*od).clone()];
                    coincidence += ua.conj() * ub.conj() * uc * ud * expectation(reg, &ops)?;
                }
            }
        }
    }
    let intensity = |u: &[(&ModeOperator, Complex64); 2]| -> Result<f64, FockError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (oa, ua) in u {
            for (ob, ub) in u {
                acc += ua.conj() * ub * expectation(reg, &[oa.adjoint(), (*ob).clone()])?;
            }
        }
        Ok(acc.re)
    };
    Ok(BackendPoint {
        time,
        n_sig_1: units[0].signal_n,
        n_sig_2: units[1].signal_n,
        g2: g2_from_balanced(coincidence.re, intensity(&plus)?, intensity(&minus)?),
        cross,
        units,
        trace_error: 0.0,
        truncation_tail: 0.0,
    })
}

/// Evolve all four modes jointly. Observables are evaluated on the joint
/// register without assuming product structure.
pub fn lindblad_evolve(
    initial: &FockRegister,
    params: &EnbsParams,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionResult, DynamicsError> {
    let d = initial.mode_dims();
    if d.len() != 4 {
        return Err(FockError::DimensionMismatch(format!(
            "joint register needs 4 modes, got {d:?}"
        ))
        .into());
    }
    let dims = [d[0], d[1], d[2], d[3]];
    let h = build_hamiltonian(params, &dims)?;
    let mut jumps = Vec::new();
    for (mode, rate) in [
        (0, params.kappa_s),
        (1, params.kappa_i),
        (2, params.kappa_s),
        (3, params.kappa_i),
    ] {
        jumps.push((
            rate,
            ModeOperator::annihilation(mode, dims[mode]).embed_sparse(&dims)?,
        ));
    }
    let mut observables = Vec::with_capacity(t_grid.len());
    let mut diagnostics = Diagnostics::default();
    let (fin, steps) = evolve_register(
        initial,
        &h,
        &jumps,
        params.g_eff_mag,
        t_grid,
        opts,
        |i, s| {
            let mut p = joint_point(t_grid[i], &s.register, params)?;
            p.trace_error = s.trace_error;
            p.truncation_tail = s.tail;
            diagnostics.trace_error = diagnostics.trace_error.max(s.trace_error);
            diagnostics.hermiticity_error = diagnostics.hermiticity_error.max(s.hermiticity_error);
            diagnostics.truncation_tail = diagnostics.truncation_tail.max(s.tail);
            observables.push(p);
            Ok(())
        },
    )?;
    diagnostics.step_count = steps;
    Ok(EvolutionResult {
        times: t_grid.to_vec(),
        observables,
        final_state: FinalState::Fock(vec![fin]),
        diagnostics,
    })
}

/// Purity `Tr ρ²` of a register (1 for pure registers).
pub fn purity(reg: &FockRegister) -> f64 {
    match reg.data() {
        FockData::Pure(_) => 1.0,
        FockData::Density(_) => reg.purity(),
    }
}
