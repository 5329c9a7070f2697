// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps, named presets and the backend cross-validation report.
//!
//! Every sweep produces a [`CsvTable`] whose rows follow axis order no
//! matter how the points were scheduled. Floats are written with 17
//! significant digits so identical specs give byte-identical files.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{self, AnalyticError, G2Value};
use crate::dynamics::lindblad::unit_initial_state;
use crate::dynamics::{
    gaussian_evolve, lindblad_evolve_units, suggested_unit_dims, BackendPoint, DynamicsError,
    EvolveOptions, GaussianMoments, InitialState, G2_FLOOR,
};
use crate::fockspace::FockError;
use crate::params::{derive_phases, validate_params, EnbsParams, ParamError, SeedField};
use crate::qinfo::seeded_triality;

/// Fidelities below this are written as exactly zero.
pub const FIDELITY_FLOOR: f64 = 1e-30;

/// Points per one-dimensional preset axis.
pub const LINE_POINTS: usize = 501;
/// Points per axis of the phase-plane preset.
pub const PLANE_POINTS: usize = 201;

/// 1 GHz read as an angular frequency.
const GHZ: f64 = TAU * 1e9;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid scan: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Inclusive uniform axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: &str, start: f64, stop: f64, count: usize) -> Self {
        Self {
            name: name.to_string(),
            start,
            stop,
            count,
        }
    }

    fn check(&self) -> Result<(), ScanError> {
        if self.count < 2 {
            return Err(ScanError::InvalidSpec(format!(
                "axis `{}` needs at least 2 points",
                self.name
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(ScanError::InvalidSpec(format!(
                "axis `{}` needs finite start < stop, got {}..{}",
                self.name, self.start, self.stop
            )));
        }
        Ok(())
    }

    /// Point `i`; the last point is `stop` exactly.
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.stop;
        }
        self.start + (self.stop - self.start) * (i as f64 / (self.count - 1) as f64)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

/// Grid of the backend cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidateGrid {
    pub initial_states: Vec<InitialState>,
    pub alpha_mags: Vec<f64>,
    /// Values of `|g_eff| t`.
    pub gain_args: Vec<f64>,
    /// Values of `κ_s / |g_eff|`.
    pub kappa_ratios: Vec<f64>,
    /// Truncated population allowed when sizing the Fock registers.
    pub dim_tail: f64,
}

impl Default for ValidateGrid {
    fn default() -> Self {
        Self {
            initial_states: InitialState::ALL.to_vec(),
            alpha_mags: vec![0.0, 1.0, 2.0],
            gain_args: vec![0.1, 0.3, 0.6],
            kappa_ratios: vec![0.0, 1.0, 3.0],
            dim_tail: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanTarget {
    /// Signal photon number of arm 1 against time, with and without the
    /// damping factor. Axis: `t`.
    NsigTime,
    /// g² over the symmetric phase plane at a fixed time. Axes: `phi_n`,
    /// `phi`.
    G2PhaseGrid {
        time: f64,
    },
    /// Symmetric branch fidelity per seed magnitude. Axis: `dphi_sd`.
    FidelityPhase {
        alpha_mags: Vec<f64>,
    },
    /// Triality measures at the seed magnitude of arm 1. Axis: `dphi_sd`.
    TrialityPhase,
    ValidateBackends(ValidateGrid),
}

impl ScanTarget {
    pub fn name(&self) -> &'static str {
        match self {
            ScanTarget::NsigTime => "nsig_time",
            ScanTarget::G2PhaseGrid { .. } => "g2_phase_grid",
            ScanTarget::FidelityPhase { .. } => "fidelity_phase",
            ScanTarget::TrialityPhase => "triality_phase",
            ScanTarget::ValidateBackends(_) => "validate_backends",
        }
    }

    fn axis_names(&self) -> &'static [&'static str] {
        match self {
            ScanTarget::NsigTime => &["t"],
            ScanTarget::G2PhaseGrid { .. } => &["phi_n", "phi"],
            ScanTarget::FidelityPhase { .. } | ScanTarget::TrialityPhase => &["dphi_sd"],
            ScanTarget::ValidateBackends(_) => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub target: ScanTarget,
    pub axes: Vec<Axis>,
    /// Parameters not swept by the axes.
    pub params: EnbsParams,
    pub output_path: Option<PathBuf>,
}

impl ScanSpec {
    fn check(&self) -> Result<(), ScanError> {
        let want = self.target.axis_names();
        let got: Vec<&str> = self.axes.iter().map(|a| a.name.as_str()).collect();
        if want != got.as_slice() {
            return Err(ScanError::InvalidSpec(format!(
                "target {} expects axes {:?}, got {:?}",
                self.target.name(),
                want,
                got
            )));
        }
        self.axes.iter().try_for_each(Axis::check)
    }
}

/// Named presets for the reference curves shipped in `golden/`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Methods,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Methods,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Methods => "methods",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Golden file name.
    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }

    pub fn spec(self) -> ScanSpec {
        let seeded = |mag: f64, g: f64, kappa_s: f64| EnbsParams {
            g_eff_mag: g,
            seed_1: SeedField::new(mag, 0.0).expect("valid preset"),
            seed_2: SeedField::new(mag, 0.0).expect("valid preset"),
            kappa_s,
            ..EnbsParams::default()
        };
        let window = Axis::new("t", 0.0, 75e-12, LINE_POINTS);
        let phase_line = Axis::new("dphi_sd", 0.0, TAU, LINE_POINTS);
        let (target, axes, params) = match self {
            Preset::Fig2 => (
                ScanTarget::NsigTime,
                vec![window],
                seeded(5.0, GHZ, 3.0 * GHZ),
            ),
            Preset::Methods => (
                ScanTarget::NsigTime,
                vec![window],
                seeded(5.0, 10.0 * GHZ, 2.5 * GHZ),
            ),
            Preset::Fig3 => (
                ScanTarget::G2PhaseGrid { time: 75e-12 },
                vec![
                    Axis::new("phi_n", 0.0, TAU, PLANE_POINTS),
                    Axis::new("phi", 0.0, TAU, PLANE_POINTS),
                ],
                seeded(2.0, GHZ, 0.0),
            ),
            Preset::Fig4 => (
                ScanTarget::FidelityPhase {
                    alpha_mags: vec![1.0, 4.0, 10.0],
                },
                vec![phase_line],
                EnbsParams::default(),
            ),
            Preset::Fig5 => (
                ScanTarget::TrialityPhase,
                vec![phase_line],
                seeded(2.0, 0.0, 0.0),
            ),
        };
        ScanSpec {
            target,
            axes,
            params,
            output_path: None,
        }
    }
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Float(v) if v.is_infinite() => {
                write!(f, "{}", if *v > 0.0 { "inf" } else { "-inf" })
            }
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

fn opt(v: Option<f64>) -> Cell {
    v.map_or(Cell::Empty, Cell::Float)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// Comment lines written before the column header.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Float values of a column; non-float cells become `None`.
    pub fn floats(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[k] {
                    Cell::Float(v) => Some(v),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

/// `key = value` pairs describing a resolved parameter set.
pub fn params_meta(p: &EnbsParams) -> Vec<(String, String)> {
    let pairs: [(&str, f64); 11] = [
        ("g_eff_mag", p.g_eff_mag),
        ("kappa_s", p.kappa_s),
        ("kappa_i", p.kappa_i),
        ("arm1.pump_phase", p.pump_phase_1),
        ("arm1.signal_phase", p.signal_phase_1),
        ("arm1.seed_mag", p.seed_1.amplitude_mag),
        ("arm1.seed_phase", p.seed_1.phase),
        ("arm2.pump_phase", p.pump_phase_2),
        ("arm2.signal_phase", p.signal_phase_2),
        ("arm2.seed_mag", p.seed_2.amplitude_mag),
        ("arm2.seed_phase", p.seed_2.phase),
    ];
    let mut out: Vec<(String, String)> = pairs
        .iter()
        .map(|(k, v)| (k.to_string(), format!("{v:?}")))
        .collect();
    out.push(("comb_bins".into(), p.comb_bins.to_string()));
    out
}

fn header(spec: &ScanSpec, params: &EnbsParams) -> Vec<(String, String)> {
    let mut meta = vec![
        (
            "generator".to_string(),
            format!("enbs {}", env!("CARGO_PKG_VERSION")),
        ),
        ("target".to_string(), spec.target.name().to_string()),
    ];
    for a in &spec.axes {
        meta.push((
            format!("axis.{}", a.name),
            format!("{:?}:{:?}:{}", a.start, a.stop, a.count),
        ));
    }
    match &spec.target {
        ScanTarget::G2PhaseGrid { time } => meta.push(("time_s".into(), format!("{time:?}"))),
        ScanTarget::FidelityPhase { alpha_mags } => {
            let list: Vec<String> = alpha_mags.iter().map(|a| format!("{a:?}")).collect();
            meta.push(("alpha_mags".into(), list.join(" ")));
        }
        ScanTarget::ValidateBackends(grid) => {
            let join = |v: &[f64]| {
                v.iter()
                    .map(|x| format!("{x:?}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let kinds: Vec<&str> = grid.initial_states.iter().map(|k| k.name()).collect();
            meta.push(("initial_states".into(), kinds.join(" ")));
            meta.push(("alpha_mags".into(), join(&grid.alpha_mags)));
            meta.push(("gain_args".into(), join(&grid.gain_args)));
            meta.push(("kappa_ratios".into(), join(&grid.kappa_ratios)));
            meta.push(("dim_tail".into(), format!("{:?}", grid.dim_tail)));
        }
        ScanTarget::NsigTime | ScanTarget::TrialityPhase => {}
    }
    meta.extend(params_meta(params));
    meta
}

/// Evaluate `f` on every index in parallel, keeping index order.
fn ordered<T: Send>(
    n: usize,
    f: impl Fn(usize) -> Result<T, ScanError> + Sync + Send,
) -> Result<Vec<T>, ScanError> {
    (0..n).into_par_iter().map(f).collect()
}

pub fn run_scan(spec: &ScanSpec) -> Result<CsvTable, ScanError> {
    spec.check()?;
    let params = validate_params(&spec.params)?;
    let (columns, rows) = match &spec.target {
        ScanTarget::NsigTime => nsig_time(&spec.axes[0], &params)?,
        ScanTarget::G2PhaseGrid { time } => {
            g2_phase_grid(&spec.axes[0], &spec.axes[1], *time, &params)?
        }
        ScanTarget::FidelityPhase { alpha_mags } => fidelity_phase(&spec.axes[0], alpha_mags)?,
        ScanTarget::TrialityPhase => triality_phase(&spec.axes[0], &params)?,
        ScanTarget::ValidateBackends(grid) => {
            let report = validate_backends(grid, &params)?;
            (
                names(&report_columns()),
                report.iter().map(ValidateRow::cells).collect(),
            )
        }
    };
    Ok(CsvTable {
        meta: header(spec, &params),
        columns,
        rows,
    })
}

type Body = (Vec<String>, Vec<Vec<Cell>>);

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn nsig_time(axis: &Axis, p: &EnbsParams) -> Result<Body, ScanError> {
    let phi_n = derive_phases(p).phi_n_1;
    let rows = ordered(axis.count, |i| {
        let t = axis.point(i);
        let undamped = analytic::n_sig(t, p.seed_1, phi_n, p.g_eff_mag, 0.0)?;
        let damped = analytic::n_sig(t, p.seed_1, phi_n, p.g_eff_mag, p.kappa_s)?;
        Ok(vec![
            Cell::Float(t),
            Cell::Float(undamped),
            Cell::Float(damped),
        ])
    })?;
    Ok((names(&["t_s", "nsig_undamped", "nsig_damped"]), rows))
}

/// Symmetric arms with local phase `phi_n` on both units and global phase
/// `phi`, carried by the pump phases and the arm-1 signal phase.
pub fn phase_plane_params(base: &EnbsParams, phi_n: f64, phi: f64) -> EnbsParams {
    EnbsParams {
        pump_phase_1: phi_n,
        pump_phase_2: phi_n,
        signal_phase_1: -phi,
        signal_phase_2: 0.0,
        seed_1: SeedField {
            phase: 0.0,
            ..base.seed_1
        },
        seed_2: SeedField {
            phase: 0.0,
            ..base.seed_2
        },
        ..*base
    }
}

fn g2_phase_grid(ax_n: &Axis, ax_phi: &Axis, time: f64, p: &EnbsParams) -> Result<Body, ScanError> {
    let n = ax_phi.count;
    let rows = ordered(ax_n.count * n, |k| {
        let (phi_n, phi) = (ax_n.point(k / n), ax_phi.point(k % n));
        let q = validate_params(&phase_plane_params(p, phi_n, phi))?;
        let g2 = analytic::g2_zero_delay(time, &q)?;
        Ok(match g2 {
            G2Value::Finite(v) => vec![
                Cell::Float(phi_n),
                Cell::Float(phi),
                Cell::Float(v),
                Cell::Int(0),
            ],
            G2Value::Divergent => vec![
                Cell::Float(phi_n),
                Cell::Float(phi),
                Cell::Empty,
                Cell::Int(1),
            ],
        })
    })?;
    Ok((names(&["phi_n", "phi", "g2", "is_divergent"]), rows))
}

fn floor_fidelity(f: f64) -> f64 {
    if f < FIDELITY_FLOOR {
        0.0
    } else {
        f
    }
}

fn fidelity_phase(axis: &Axis, mags: &[f64]) -> Result<Body, ScanError> {
    if mags.is_empty() {
        return Err(ScanError::InvalidSpec("no seed magnitudes".into()));
    }
    if let Some(bad) = mags.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(ScanError::InvalidSpec(format!(
            "invalid seed magnitude {bad}"
        )));
    }
    let rows = ordered(axis.count, |i| {
        let d = axis.point(i);
        let mut row = vec![Cell::Float(d)];
        row.extend(
            mags.iter()
                .map(|&a| Cell::Float(floor_fidelity(analytic::fidelity_symmetric(a, d)))),
        );
        Ok(row)
    })?;
    let mut columns = names(&["dphi_sd"]);
    columns.extend(mags.iter().map(|a| format!("f_alpha{}", fmt_mag(*a))));
    Ok((columns, rows))
}

fn fmt_mag(a: f64) -> String {
    if a.fract() == 0.0 {
        format!("{a:.0}")
    } else {
        format!("{a}").replace('.', "p")
    }
}

fn triality_phase(axis: &Axis, p: &EnbsParams) -> Result<Body, ScanError> {
    let (m1, m2) = (p.seed_1.amplitude_mag, p.seed_2.amplitude_mag);
    let rows = ordered(axis.count, |i| {
        let d = axis.point(i);
        let (t, f) = seeded_triality(Complex64::from_polar(m1, d), Complex64::new(m2, 0.0));
        Ok(vec![
            Cell::Float(d),
            Cell::Float(f),
            Cell::Float(t.visibility),
            Cell::Float(t.predictability),
            Cell::Float(t.entanglement),
            Cell::Float(t.entanglement_factor2()),
        ])
    })?;
    Ok((
        names(&["dphi_sd", "f", "v", "p", "e_triality", "e_methods"]),
        rows,
    ))
}

/// One row of the backend cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidateRow {
    pub initial_state: InitialState,
    pub alpha_mag: f64,
    pub gain_arg: f64,
    pub kappa_ratio: f64,
    pub time: f64,
    pub n_analytic: f64,
    /// `None` for initial states without a Gaussian representation.
    pub n_gaussian: Option<f64>,
    pub n_fock: f64,
    /// The seed-interference term `2|α| cos Φ_N sinh²(|g|t) e^{−κ_s t}` of
    /// the closed form.
    pub interference_term: f64,
    pub g2_analytic: G2Value,
    pub g2_gaussian: Option<G2Value>,
    pub g2_fock: G2Value,
    /// Signal autocorrelation `⟨A†²A²⟩/⟨A†A⟩²` of unit 1.
    pub g2_unit_gaussian: Option<f64>,
    pub g2_unit_fock: Option<f64>,
    pub truncation_tail: f64,
    pub trace_error: f64,
    pub dims: [usize; 2],
}

impl ValidateRow {
    pub fn n_gap_analytic_fock(&self) -> f64 {
        self.n_analytic - self.n_fock
    }

    pub fn n_gap_gaussian_fock(&self) -> Option<f64> {
        self.n_gaussian.map(|n| (n - self.n_fock).abs())
    }

    pub fn g2_gap_gaussian_fock(&self) -> Option<f64> {
        match (self.g2_gaussian?, self.g2_fock) {
            (G2Value::Finite(a), G2Value::Finite(b)) => Some((a - b).abs()),
            (G2Value::Divergent, G2Value::Divergent) => Some(0.0),
            _ => Some(f64::INFINITY),
        }
    }

    pub fn g2_unit_gap(&self) -> Option<f64> {
        Some((self.g2_unit_gaussian? - self.g2_unit_fock?).abs())
    }

    fn cells(&self) -> Vec<Cell> {
        let g2 = |v: G2Value| match v {
            G2Value::Finite(x) => Cell::Float(x),
            G2Value::Divergent => Cell::Float(f64::INFINITY),
        };
        let rel = (self.n_fock > 0.0).then(|| self.n_gap_analytic_fock() / self.n_fock);
        vec![
            Cell::Text(self.initial_state.name().into()),
            Cell::Float(self.alpha_mag),
            Cell::Float(self.gain_arg),
            Cell::Float(self.kappa_ratio),
            Cell::Float(self.time),
            Cell::Float(self.n_analytic),
            opt(self.n_gaussian),
            Cell::Float(self.n_fock),
            Cell::Float(self.n_gap_analytic_fock()),
            opt(rel),
            opt(self.n_gap_gaussian_fock()),
            Cell::Float(self.interference_term),
            g2(self.g2_analytic),
            self.g2_gaussian.map_or(Cell::Empty, g2),
            g2(self.g2_fock),
            opt(self.g2_gap_gaussian_fock()),
            opt(self.g2_unit_gaussian),
            opt(self.g2_unit_fock),
            opt(self.g2_unit_gap()),
            Cell::Float(self.truncation_tail),
            Cell::Float(self.trace_error),
            Cell::Int(self.dims[0] as i64),
            Cell::Int(self.dims[1] as i64),
        ]
    }
}

fn report_columns() -> Vec<&'static str> {
    vec![
        "initial_state",
        "alpha_mag",
        "g_t",
        "kappa_ratio",
        "time_s",
        "n_analytic",
        "n_gaussian",
        "n_fock",
        "n_gap_analytic_fock",
        "n_relgap_analytic_fock",
        "n_gap_gaussian_fock",
        "interference_term",
        "g2_analytic",
        "g2_gaussian",
        "g2_fock",
        "g2_gap_gaussian_fock",
        "g2_unit_gaussian",
        "g2_unit_fock",
        "g2_unit_gap",
        "truncation_tail",
        "trace_error",
        "dim_signal",
        "dim_idler",
    ]
}

fn unit_autocorrelation(p: &BackendPoint) -> Option<f64> {
    let u = p.units[0];
    (u.signal_n > G2_FLOOR).then(|| u.signal_n2 / (u.signal_n * u.signal_n))
}

/// Parameters of one validation point: symmetric seeds along the real axis
/// with all phases zero (Φ_N = 0), rates in units of `base.g_eff_mag`.
pub fn validate_point_params(
    base: &EnbsParams,
    alpha_mag: f64,
    kappa_ratio: f64,
) -> Result<EnbsParams, ScanError> {
    let g = if base.g_eff_mag > 0.0 {
        base.g_eff_mag
    } else {
        GHZ
    };
    let seed = SeedField::new(alpha_mag, 0.0)?;
    Ok(EnbsParams {
        g_eff_mag: g,
        pump_phase_1: 0.0,
        pump_phase_2: 0.0,
        signal_phase_1: 0.0,
        signal_phase_2: 0.0,
        seed_1: seed,
        seed_2: seed,
        kappa_s: kappa_ratio * g,
        kappa_i: base.kappa_i,
        comb_bins: base.comb_bins,
    })
}

/// Compare the closed forms, the Gaussian backend and the Fock backend over
/// the grid. Rows run over initial state, seed magnitude, damping and gain
/// argument, in that nesting order.
pub fn validate_backends(
    grid: &ValidateGrid,
    base: &EnbsParams,
) -> Result<Vec<ValidateRow>, ScanError> {
    if grid.gain_args.is_empty()
        || grid.gain_args.windows(2).any(|w| w[1] <= w[0])
        || grid.gain_args[0] <= 0.0
    {
        return Err(ScanError::InvalidSpec(
            "gain arguments must be positive and increasing".into(),
        ));
    }
    let mut cases = Vec::new();
    for &kind in &grid.initial_states {
        for &a in &grid.alpha_mags {
            for &k in &grid.kappa_ratios {
                cases.push((kind, a, k));
            }
        }
    }
    let blocks = ordered(cases.len(), |c| {
        let (kind, a, k) = cases[c];
        validate_case(kind, a, k, grid, base)
    })?;
    Ok(blocks.into_iter().flatten().collect())
}

fn validate_case(
    kind: InitialState,
    alpha_mag: f64,
    kappa_ratio: f64,
    grid: &ValidateGrid,
    base: &EnbsParams,
) -> Result<Vec<ValidateRow>, ScanError> {
    let p = validate_point_params(base, alpha_mag, kappa_ratio)?;
    let g = p.g_eff_mag;
    let times: Vec<f64> = grid.gain_args.iter().map(|x| x / g).collect();
    let dims = suggested_unit_dims(kind, &p, &times, grid.dim_tail)?;
    let r1 = unit_initial_state(kind, p.seed_1.amplitude(), dims[0])?;
    let r2 = unit_initial_state(kind, p.seed_2.amplitude(), dims[1])?;
    let fock = lindblad_evolve_units([&r1, &r2], &p, &times, &EvolveOptions::default())?;
    let gauss = match GaussianMoments::initial(kind, &p) {
        Ok(m) => Some(gaussian_evolve(&m, &p, &times)?),
        Err(DynamicsError::NonGaussian) => None,
        Err(e) => return Err(e.into()),
    };
    let phi_n = derive_phases(&p).phi_n_1;
    let mut rows = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let fp = &fock.observables[k];
        let gp = gauss.as_ref().map(|r| &r.observables[k]);
        let s = (g * t).sinh();
        rows.push(ValidateRow {
            initial_state: kind,
            alpha_mag,
            gain_arg: grid.gain_args[k],
            kappa_ratio,
            time: t,
            n_analytic: analytic::n_sig(t, p.seed_1, phi_n, g, p.kappa_s)?,
            n_gaussian: gp.map(|q| q.n_sig_1),
            n_fock: fp.n_sig_1,
            interference_term: 2.0 * alpha_mag * phi_n.cos() * s * s * (-p.kappa_s * t).exp(),
            g2_analytic: analytic::g2_zero_delay(t, &p)?,
            g2_gaussian: gp.map(|q| q.g2),
            g2_fock: fp.g2,
            g2_unit_gaussian: gp.and_then(unit_autocorrelation),
            g2_unit_fock: unit_autocorrelation(fp),
            truncation_tail: fp.truncation_tail,
            trace_error: fp.trace_error,
            dims: dims[0],
        });
    }
    Ok(rows)
}

/// The validation scan with the default grid.
pub fn validate_spec() -> ScanSpec {
    ScanSpec {
        target: ScanTarget::ValidateBackends(ValidateGrid::default()),
        axes: Vec::new(),
        params: EnbsParams {
            g_eff_mag: GHZ,
            ..EnbsParams::default()
        },
        output_path: None,
    }
}

/// Outcome of comparing a regenerated table with its golden file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldenCheck {
    Match,
    Missing,
    /// First differing line (1-based), or the shorter length plus one.
    Differs {
        line: usize,
    },
}

pub fn compare_golden(generated: &str, golden: Option<&str>) -> GoldenCheck {
    let Some(golden) = golden else {
        return GoldenCheck::Missing;
    };
    if generated == golden {
        return GoldenCheck::Match;
    }
    let mut a = generated.lines();
    let mut b = golden.lines();
    let mut line = 1;
    loop {
        match (a.next(), b.next()) {
            (Some(x), Some(y)) if x == y => line += 1,
            _ => return GoldenCheck::Differs { line },
        }
    }
}

/// Location of the closest grid point to `target` on an axis.
pub fn nearest_index(axis: &Axis, target: f64) -> usize {
    let step = (axis.stop - axis.start) / (axis.count - 1) as f64;
    (((target - axis.start) / step).round().max(0.0) as usize).min(axis.count - 1)
}
