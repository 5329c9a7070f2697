// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on a domain error (or a golden mismatch in
//! `--check` mode), 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::analytic::{self, G2Value};
use crate::config::{parse_phase, resolve_params, ConfigFile};
use crate::dynamics::lindblad::unit_initial_state;
use crate::dynamics::{
    gaussian_evolve, lindblad_evolve, lindblad_evolve_units, suggested_unit_dims,
    write_trajectory_csv, EvolutionResult, EvolveOptions, FinalState, GaussianMoments,
    InitialState,
};
use crate::fockspace::tensor;
use crate::params::{derive_phases, Arm, EnbsParams};
use crate::qinfo::seeded_triality;
use crate::scans::{
    compare_golden, run_scan, validate_spec, Axis, GoldenCheck, Preset, ScanSpec, ScanTarget,
    ValidateGrid,
};

#[derive(Debug, Parser)]
#[command(
    name = "enbs",
    version,
    about = "Simulator for entangled nonlinear biphoton sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML parameter file.
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Override one parameter, e.g. `arm1.seed_phase=pi/2` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Start from the parameters of a preset.
    #[arg(long, value_enum)]
    preset: Option<PresetName>,
    /// Write output here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the resolved parameters as a parameter file and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetName {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Methods,
}

impl PresetName {
    fn preset(self) -> Preset {
        match self {
            PresetName::Fig2 => Preset::Fig2,
            PresetName::Fig3 => Preset::Fig3,
            PresetName::Fig4 => Preset::Fig4,
            PresetName::Fig5 => Preset::Fig5,
            PresetName::Methods => Preset::Methods,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetName {
    NsigTime,
    G2PhaseGrid,
    FidelityPhase,
    TrialityPhase,
    ValidateBackends,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Backend {
    Gaussian,
    Fock,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitialName {
    VacuumSignal,
    SpacsIdler,
    CoherentSignal,
}

impl InitialName {
    fn kind(self) -> InitialState {
        match self {
            InitialName::VacuumSignal => InitialState::VacuumSignal,
            InitialName::SpacsIdler => InitialState::SpacsIdler,
            InitialName::CoherentSignal => InitialState::CoherentSignal,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form signal photon number of both arms.
    Nsig {
        #[command(flatten)]
        common: Common,
        /// Time in seconds.
        #[arg(long)]
        time: f64,
    },
    /// Closed-form zero-delay g² (`inf` when divergent).
    G2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        time: f64,
    },
    /// Branch fidelity of the two seeds, or of a symmetric pair.
    Fidelity {
        #[command(flatten)]
        common: Common,
        /// Common seed magnitude; with --dphi-sd replaces the seeds.
        #[arg(long)]
        alpha_mag: Option<f64>,
        /// Seed phase difference (radians or pi literals).
        #[arg(long, allow_hyphen_values = true)]
        dphi_sd: Option<String>,
    },
    /// Visibility, predictability and entanglement of the signal qubit.
    Triality {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha_mag: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        dphi_sd: Option<String>,
    },
    /// Time evolution with one of the first-principles backends.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "gaussian")]
        backend: Backend,
        #[arg(long, value_enum, default_value = "vacuum-signal")]
        initial: InitialName,
        /// Final time in seconds.
        #[arg(long)]
        t_max: f64,
        /// Number of output times, including t = 0.
        #[arg(long, default_value_t = 31)]
        points: usize,
        /// Fock dimensions `signal,idler` for both units.
        #[arg(long, value_name = "DS,DI")]
        dims: Option<String>,
        /// Truncated population allowed when sizing Fock registers.
        #[arg(long, default_value_t = 1e-8)]
        tail: f64,
        /// Integrate all four modes in one register.
        #[arg(long)]
        joint: bool,
        /// Also write the final Fock state(s) as CSV.
        #[arg(long, value_name = "PATH")]
        state_out: Option<PathBuf>,
    },
    /// Parameter sweep or preset reference curves.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Quantity to sweep; defaults to the preset's.
        #[arg(long, value_enum)]
        target: Option<TargetName>,
        /// Replace an axis: `name=start:stop:count` (repeatable).
        #[arg(long, value_name = "AXIS", allow_hyphen_values = true)]
        axis: Vec<String>,
        /// Evaluation time (seconds) of the phase-plane scan.
        #[arg(long)]
        time: Option<f64>,
        /// Seed magnitudes of the fidelity scan, comma separated.
        #[arg(long)]
        alphas: Option<String>,
        /// Compare with the golden file instead of trusting the output.
        #[arg(long)]
        check: bool,
        /// Directory holding the golden CSV files.
        #[arg(long, default_value = "golden")]
        golden_dir: PathBuf,
    },
    /// Closed forms against both backends over a regime grid.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Restrict to these initial states (repeatable).
        #[arg(long, value_enum)]
        initial: Vec<InitialName>,
        /// Seed magnitudes, comma separated.
        #[arg(long)]
        alphas: Option<String>,
        /// Values of |g_eff| t, comma separated.
        #[arg(long)]
        gain_args: Option<String>,
        /// Values of κ_s/|g_eff|, comma separated.
        #[arg(long)]
        kappa_ratios: Option<String>,
        /// Truncated population allowed when sizing Fock registers.
        #[arg(long, default_value_t = 1e-8)]
        tail: f64,
    },
}

/// Failure with its exit status.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn domain(e: impl std::fmt::Display) -> Self {
        Failure {
            code: 1,
            message: format!("error: {e}"),
        }
    }

    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: format!("usage error: {}", msg.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Parse `argv` (program name first) and run it.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.message);
            f.code
        }
    }
}

fn base_params(common: &Common) -> EnbsParams {
    common
        .preset
        .map_or_else(EnbsParams::default, |p| p.preset().spec().params)
}

fn resolve(common: &Common, base: &EnbsParams) -> Result<EnbsParams, Failure> {
    resolve_params(base, common.params.as_deref(), &common.set).map_err(Failure::domain)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Failure::domain)
        }
    }
}

fn dump(params: &EnbsParams) -> String {
    ConfigFile::from_params(params).to_toml()
}

fn phase_arg(text: &str) -> Result<f64, Failure> {
    parse_phase(text).ok_or_else(|| Failure::usage(format!("invalid phase `{text}`")))
}

fn list_arg(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("invalid number `{s}` in list")))
        })
        .collect()
}

fn g2_text(v: G2Value) -> String {
    match v {
        G2Value::Finite(x) => format!("{x}"),
        G2Value::Divergent => "inf".to_string(),
    }
}

/// Seeds from `--alpha-mag`/`--dphi-sd` when given, else from the parameters.
fn seeds(
    params: &EnbsParams,
    alpha_mag: Option<f64>,
    dphi_sd: Option<&str>,
) -> Result<(Complex64, Complex64), Failure> {
    match (alpha_mag, dphi_sd) {
        (None, None) => Ok((params.seed_1.amplitude(), params.seed_2.amplitude())),
        (Some(a), Some(d)) => {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Failure::usage(format!(
                    "--alpha-mag must be nonnegative, got {a}"
                )));
            }
            Ok((
                Complex64::from_polar(a, phase_arg(d)?),
                Complex64::new(a, 0.0),
            ))
        }
        _ => Err(Failure::usage("--alpha-mag and --dphi-sd go together")),
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Nsig { common, time } => {
            let p = resolve(&common, &base_params(&common))?;
            if common.dump_config {
                return emit(None, &dump(&p));
            }
            let phases = derive_phases(&p);
            let mut text = String::new();
            for arm in Arm::BOTH {
                let n =
                    analytic::n_sig(time, p.seed(arm), phases.phi_n(arm), p.g_eff_mag, p.kappa_s)
                        .map_err(Failure::domain)?;
                text.push_str(&format!("n_sig_{} = {n}\n", arm.index() + 1));
            }
            emit(common.out.as_deref(), &text)
        }
        Command::G2 { common, time } => {
            let p = resolve(&common, &base_params(&common))?;
            if common.dump_config {
                return emit(None, &dump(&p));
            }
            let g2 = analytic::g2_zero_delay(time, &p).map_err(Failure::domain)?;
            emit(common.out.as_deref(), &format!("{}\n", g2_text(g2)))
        }
        Command::Fidelity {
            common,
            alpha_mag,
            dphi_sd,
        } => {
            let p = resolve(&common, &base_params(&common))?;
            if common.dump_config {
                return emit(None, &dump(&p));
            }
            let f = match (alpha_mag, dphi_sd.as_deref()) {
                (Some(a), Some(d)) if a >= 0.0 && a.is_finite() => {
                    analytic::fidelity_symmetric(a, phase_arg(d)?)
                }
                (a, d) => {
                    let (a1, a2) = seeds(&p, a, d)?;
                    analytic::fidelity(a1, a2)
                }
            };
            emit(common.out.as_deref(), &format!("{f}\n"))
        }
        Command::Triality {
            common,
            alpha_mag,
            dphi_sd,
        } => {
            let p = resolve(&common, &base_params(&common))?;
            if common.dump_config {
                return emit(None, &dump(&p));
            }
            let (a1, a2) = seeds(&p, alpha_mag, dphi_sd.as_deref())?;
            let (t, f) = seeded_triality(a1, a2);
            let text = format!(
                "f = {f}\nv = {}\np = {}\ne_triality = {}\ne_methods = {}\npurity = {}\n",
                t.visibility,
                t.predictability,
                t.entanglement,
                t.entanglement_factor2(),
                t.state_purity
            );
            emit(common.out.as_deref(), &text)
        }
        Command::Evolve {
            common,
            backend,
            initial,
            t_max,
            points,
            dims,
            tail,
            joint,
            state_out,
        } => {
            let p = resolve(&common, &base_params(&common))?;
            if common.dump_config {
                return emit(None, &dump(&p));
            }
            if points < 2 || !(t_max.is_finite() && t_max > 0.0) {
                return Err(Failure::usage("need --t-max > 0 and --points >= 2"));
            }
            let grid = Axis::new("t", 0.0, t_max, points).points();
            let result = evolve(
                &p,
                backend,
                initial.kind(),
                &grid,
                dims.as_deref(),
                tail,
                joint,
            )?;
            eprintln!(
                "steps = {}, trace_error = {:e}, hermiticity_error = {:e}, truncation_tail = {:e}",
                result.diagnostics.step_count,
                result.diagnostics.trace_error,
                result.diagnostics.hermiticity_error,
                result.diagnostics.truncation_tail
            );
            if let Some(path) = state_out {
                write_state(&result, &path)?;
            }
            let mut buf = Vec::new();
            write_trajectory_csv(&result, &mut buf).map_err(Failure::domain)?;
            emit(common.out.as_deref(), &String::from_utf8_lossy(&buf))
        }
        Command::Scan {
            common,
            target,
            axis,
            time,
            alphas,
            check,
            golden_dir,
        } => scan(
            common,
            target,
            &axis,
            time,
            alphas.as_deref(),
            check,
            &golden_dir,
        ),
        Command::Validate {
            common,
            initial,
            alphas,
            gain_args,
            kappa_ratios,
            tail,
        } => {
            let mut spec = validate_spec();
            spec.params = resolve(&common, &spec.params)?;
            if common.dump_config {
                return emit(None, &dump(&spec.params));
            }
            let mut grid = ValidateGrid {
                dim_tail: tail,
                ..ValidateGrid::default()
            };
            if !initial.is_empty() {
                grid.initial_states = initial.iter().map(|k| k.kind()).collect();
            }
            if let Some(a) = alphas {
                grid.alpha_mags = list_arg(&a)?;
            }
            if let Some(a) = gain_args {
                grid.gain_args = list_arg(&a)?;
            }
            if let Some(a) = kappa_ratios {
                grid.kappa_ratios = list_arg(&a)?;
            }
            spec.target = ScanTarget::ValidateBackends(grid);
            let table = run_scan(&spec).map_err(Failure::domain)?;
            emit(common.out.as_deref(), &table.to_csv_string())
        }
    }
}

fn evolve(
    p: &EnbsParams,
    backend: Backend,
    kind: InitialState,
    grid: &[f64],
    dims: Option<&str>,
    tail: f64,
    joint: bool,
) -> Result<EvolutionResult, Failure> {
    match backend {
        Backend::Gaussian => {
            let m = GaussianMoments::initial(kind, p).map_err(Failure::domain)?;
            gaussian_evolve(&m, p, grid).map_err(Failure::domain)
        }
        Backend::Fock => {
            let unit_dims = match dims {
                Some(text) => {
                    let v: Vec<usize> = text
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| Failure::usage(format!("invalid --dims `{text}`")))?;
                    match v.as_slice() {
                        [ds, di] if *ds >= 1 && *di >= 1 => [[*ds, *di]; 2],
                        _ => {
                            return Err(Failure::usage("--dims takes two positive integers DS,DI"))
                        }
                    }
                }
                None => suggested_unit_dims(kind, p, grid, tail).map_err(Failure::domain)?,
            };
            let r1 = unit_initial_state(kind, p.seed_1.amplitude(), unit_dims[0])
                .map_err(Failure::domain)?;
            let r2 = unit_initial_state(kind, p.seed_2.amplitude(), unit_dims[1])
                .map_err(Failure::domain)?;
            let opts = EvolveOptions::default();
            if joint {
                let reg = tensor(&[&r1, &r2]).map_err(Failure::domain)?;
                lindblad_evolve(&reg, p, grid, &opts).map_err(Failure::domain)
            } else {
                lindblad_evolve_units([&r1, &r2], p, grid, &opts).map_err(Failure::domain)
            }
        }
    }
}

fn write_state(result: &EvolutionResult, path: &Path) -> Outcome {
    let FinalState::Fock(regs) = &result.final_state else {
        return Err(Failure::usage("--state-out needs the fock backend"));
    };
    let mut buf = Vec::new();
    for (k, reg) in regs.iter().enumerate() {
        if regs.len() > 1 {
            writeln!(buf, "# unit {}", k + 1).map_err(Failure::domain)?;
        }
        reg.dump_csv(&mut buf).map_err(Failure::domain)?;
    }
    fs::write(path, buf).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

fn parse_axis(text: &str) -> Result<Axis, Failure> {
    let bad = || {
        Failure::usage(format!(
            "invalid axis `{text}`, expected name=start:stop:count"
        ))
    };
    let (name, range) = text.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(bad());
    };
    let start = parse_phase(start).ok_or_else(bad)?;
    let stop = parse_phase(stop).ok_or_else(bad)?;
    let count = count.trim().parse::<usize>().map_err(|_| bad())?;
    Ok(Axis::new(name.trim(), start, stop, count))
}

fn scan(
    common: Common,
    target: Option<TargetName>,
    axes: &[String],
    time: Option<f64>,
    alphas: Option<&str>,
    check: bool,
    golden_dir: &Path,
) -> Outcome {
    let preset = common.preset.map(PresetName::preset);
    let mut spec: ScanSpec = match (preset, target) {
        (Some(p), None) => p.spec(),
        (None, Some(t)) => match t {
            TargetName::NsigTime => Preset::Fig2.spec(),
            TargetName::G2PhaseGrid => Preset::Fig3.spec(),
            TargetName::FidelityPhase => Preset::Fig4.spec(),
            TargetName::TrialityPhase => Preset::Fig5.spec(),
            TargetName::ValidateBackends => validate_spec(),
        },
        (Some(_), Some(_)) => return Err(Failure::usage("give either --preset or --target")),
        (None, None) => return Err(Failure::usage("scan needs --preset or --target")),
    };
    spec.params = resolve(&common, &spec.params)?;
    if common.dump_config {
        return emit(None, &dump(&spec.params));
    }
    for text in axes {
        let axis = parse_axis(text)?;
        match spec.axes.iter_mut().find(|a| a.name == axis.name) {
            Some(slot) => *slot = axis,
            None => {
                return Err(Failure::usage(format!(
                    "no axis `{}` in this scan",
                    axis.name
                )))
            }
        }
    }
    if let Some(t) = time {
        match &mut spec.target {
            ScanTarget::G2PhaseGrid { time } => *time = t,
            _ => {
                return Err(Failure::usage(
                    "--time applies to the phase-plane scan only",
                ))
            }
        }
    }
    if let Some(list) = alphas {
        match &mut spec.target {
            ScanTarget::FidelityPhase { alpha_mags } => *alpha_mags = list_arg(list)?,
            ScanTarget::ValidateBackends(grid) => grid.alpha_mags = list_arg(list)?,
            _ => {
                return Err(Failure::usage(
                    "--alphas applies to fidelity and validation scans",
                ))
            }
        }
    }
    let text = run_scan(&spec).map_err(Failure::domain)?.to_csv_string();
    if check {
        let Some(p) = preset else {
            return Err(Failure::usage("--check needs --preset"));
        };
        let path = golden_dir.join(p.file_name());
        let golden = fs::read_to_string(&path).ok();
        match compare_golden(&text, golden.as_deref()) {
            GoldenCheck::Match => println!("{}: match ({})", p.name(), path.display()),
            GoldenCheck::Missing => {
                return Err(Failure::domain(format!(
                    "{}: golden file {} missing",
                    p.name(),
                    path.display()
                )))
            }
            GoldenCheck::Differs { line } => {
                return Err(Failure::domain(format!(
                    "{}: differs from {} at line {line}",
                    p.name(),
                    path.display()
                )))
            }
        }
        if let Some(out) = common.out.as_deref() {
            emit(Some(out), &text)?;
        }
        return Ok(());
    }
    emit(common.out.as_deref(), &text)
}
