// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical parameters of the two-unit source and the phase bookkeeping
//! shared by every other module.
//!
//! Rates (`g_eff_mag`, `kappa_s`, `kappa_i`) are angular frequencies in
//! rad/s. Phases are radians, reduced to `[0, 2π)` on construction.
//!
//! Arm 2 is the conventional phase reference (all of its phases zero) in
//! every preset, but nothing here assumes it: the global phase is always
//! computed from the arm differences
//!
//! ```text
//! Φ = (φ_p1 − φ_p2) − [(φ_α1 − φ_α2) + (φ_s1 − φ_s2)]
//! ```
//!
//! which collapses to `φ_p1 − (φ_α1 + φ_s1)` when arm 2 is the reference.
//! Other textbook forms of Φ differ from this one only when arm 2 carries
//! nonzero phases.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("rate `{field}` must be nonnegative, got {value}")]
    NegativeRate { field: &'static str, value: f64 },
    #[error("seed amplitude `{field}` must be nonnegative, got {value}")]
    NegativeAmplitude { field: &'static str, value: f64 },
    #[error("field `{field}` is not finite ({value})")]
    NonFinite { field: &'static str, value: f64 },
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Coherent idler seed `α = |α| e^{iφ_α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedField {
    pub amplitude_mag: f64,
    pub phase: f64,
}

impl SeedField {
    pub fn new(amplitude_mag: f64, phase: f64) -> Result<Self, ParamError> {
        check_finite("seed.amplitude_mag", amplitude_mag)?;
        check_finite("seed.phase", phase)?;
        if amplitude_mag < 0.0 {
            return Err(ParamError::NegativeAmplitude {
                field: "seed.amplitude_mag",
                value: amplitude_mag,
            });
        }
        Ok(Self {
            amplitude_mag,
            phase: wrap_phase(phase),
        })
    }

    pub fn vacuum() -> Self {
        Self {
            amplitude_mag: 0.0,
            phase: 0.0,
        }
    }

    /// The complex amplitude α.
    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude_mag, self.phase)
    }
}

/// Full configuration of the two-unit source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnbsParams {
    /// |g_eff| in rad/s.
    pub g_eff_mag: f64,
    pub pump_phase_1: f64,
    pub pump_phase_2: f64,
    pub signal_phase_1: f64,
    pub signal_phase_2: f64,
    pub seed_1: SeedField,
    pub seed_2: SeedField,
    /// Signal supermode decay rate, rad/s.
    pub kappa_s: f64,
    /// Idler decay rate, rad/s.
    pub kappa_i: f64,
    /// Half-width N of the 2N+1 signal comb bins.
    pub comb_bins: u32,
}

impl Default for EnbsParams {
    fn default() -> Self {
        Self {
            g_eff_mag: 0.0,
            pump_phase_1: 0.0,
            pump_phase_2: 0.0,
            signal_phase_1: 0.0,
            signal_phase_2: 0.0,
            seed_1: SeedField::vacuum(),
            seed_2: SeedField::vacuum(),
            kappa_s: 0.0,
            kappa_i: 0.0,
            comb_bins: 0,
        }
    }
}

impl EnbsParams {
    pub fn pump_phase(&self, arm: Arm) -> f64 {
        match arm {
            Arm::One => self.pump_phase_1,
            Arm::Two => self.pump_phase_2,
        }
    }

    pub fn signal_phase(&self, arm: Arm) -> f64 {
        match arm {
            Arm::One => self.signal_phase_1,
            Arm::Two => self.signal_phase_2,
        }
    }

    pub fn seed(&self, arm: Arm) -> SeedField {
        match arm {
            Arm::One => self.seed_1,
            Arm::Two => self.seed_2,
        }
    }
}

/// One of the two source units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    One,
    Two,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::One, Arm::Two];

    pub fn index(self) -> usize {
        match self {
            Arm::One => 0,
            Arm::Two => 1,
        }
    }
}

/// Derived phase parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSet {
    /// Local pump–seed phase of arm 1, Φ_N,1 = φ_p,1 − φ_α,1.
    pub phi_n_1: f64,
    /// Local pump–seed phase of arm 2.
    pub phi_n_2: f64,
    /// Global interferometric phase Φ.
    pub phi_global: f64,
    /// Seeding phase difference Δφ_sd = φ_α,1 − φ_α,2.
    pub dphi_sd: f64,
}

impl PhaseSet {
    pub fn phi_n(&self, arm: Arm) -> f64 {
        match arm {
            Arm::One => self.phi_n_1,
            Arm::Two => self.phi_n_2,
        }
    }
}

pub fn derive_phases(params: &EnbsParams) -> PhaseSet {
    let p = params;
    let d_pump = p.pump_phase_1 - p.pump_phase_2;
    let d_seed = p.seed_1.phase - p.seed_2.phase;
    let d_signal = p.signal_phase_1 - p.signal_phase_2;
    PhaseSet {
        phi_n_1: wrap_phase(p.pump_phase_1 - p.seed_1.phase),
        phi_n_2: wrap_phase(p.pump_phase_2 - p.seed_2.phase),
        phi_global: wrap_phase(d_pump - (d_seed + d_signal)),
        dphi_sd: wrap_phase(d_seed),
    }
}

fn check_finite(field: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NonFinite { field, value })
    }
}

fn check_rate(field: &'static str, value: f64) -> Result<(), ParamError> {
    check_finite(field, value)?;
    if value < 0.0 {
        return Err(ParamError::NegativeRate { field, value });
    }
    Ok(())
}

/// Check magnitudes and wrap every phase into `[0, 2π)`.
pub fn validate_params(params: &EnbsParams) -> Result<EnbsParams, ParamError> {
    check_rate("g_eff_mag", params.g_eff_mag)?;
    check_rate("kappa_s", params.kappa_s)?;
    check_rate("kappa_i", params.kappa_i)?;
    for (field, v) in [
        ("pump_phase_1", params.pump_phase_1),
        ("pump_phase_2", params.pump_phase_2),
        ("signal_phase_1", params.signal_phase_1),
        ("signal_phase_2", params.signal_phase_2),
    ] {
        check_finite(field, v)?;
    }
    let seed = |field_mag: &'static str, field_phase: &'static str, s: SeedField| {
        check_finite(field_mag, s.amplitude_mag)?;
        check_finite(field_phase, s.phase)?;
        if s.amplitude_mag < 0.0 {
            return Err(ParamError::NegativeAmplitude {
                field: field_mag,
                value: s.amplitude_mag,
            });
        }
        Ok(SeedField {
            amplitude_mag: s.amplitude_mag,
            phase: wrap_phase(s.phase),
        })
    };
    Ok(EnbsParams {
        g_eff_mag: params.g_eff_mag,
        pump_phase_1: wrap_phase(params.pump_phase_1),
        pump_phase_2: wrap_phase(params.pump_phase_2),
        signal_phase_1: wrap_phase(params.signal_phase_1),
        signal_phase_2: wrap_phase(params.signal_phase_2),
        seed_1: seed("seed_1.amplitude_mag", "seed_1.phase", params.seed_1)?,
        seed_2: seed("seed_2.amplitude_mag", "seed_2.phase", params.seed_2)?,
        kappa_s: params.kappa_s,
        kappa_i: params.kappa_i,
        comb_bins: params.comb_bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use proptest::prelude::*;

    fn close_mod_tau(a: f64, b: f64) -> bool {
        let d = wrap_phase(a - b);
        d < 1e-12 || TAU - d < 1e-12
    }

    #[test]
    fn zero_phases_give_zero_phase_set() {
        let ps = derive_phases(&EnbsParams::default());
        assert_eq!(ps.phi_n_1, 0.0);
        assert_eq!(ps.phi_n_2, 0.0);
        assert_eq!(ps.phi_global, 0.0);
        assert_eq!(ps.dphi_sd, 0.0);
    }

    #[test]
    fn pump_offset_on_arm_one() {
        let p = EnbsParams {
            pump_phase_1: PI,
            ..Default::default()
        };
        let ps = derive_phases(&p);
        assert_eq!(ps.phi_n_1, PI);
        assert_eq!(ps.phi_global, PI);
        assert_eq!(ps.dphi_sd, 0.0);
    }

    #[test]
    fn mixed_offsets_on_arm_one() {
        let p = EnbsParams {
            pump_phase_1: PI,
            signal_phase_1: FRAC_PI_4,
            seed_1: SeedField::new(1.0, FRAC_PI_4).unwrap(),
            ..Default::default()
        };
        let ps = derive_phases(&p);
        assert!((ps.phi_n_1 - 3.0 * FRAC_PI_4).abs() < 1e-15);
        assert!((ps.phi_global - FRAC_PI_2).abs() < 1e-15);
        assert!((ps.dphi_sd - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn validate_accepts_plain_gain() {
        let p = EnbsParams {
            g_eff_mag: TAU * 1e9,
            ..Default::default()
        };
        assert_eq!(validate_params(&p).unwrap(), p);
    }

    #[test]
    fn validate_rejects_negative_rate() {
        let p = EnbsParams {
            kappa_s: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            validate_params(&p),
            Err(ParamError::NegativeRate {
                field: "kappa_s",
                ..
            })
        ));
    }

    #[test]
    fn validate_rejects_non_finite() {
        let p = EnbsParams {
            signal_phase_2: f64::NAN,
            ..Default::default()
        };
        assert!(matches!(
            validate_params(&p),
            Err(ParamError::NonFinite { .. })
        ));
        let p = EnbsParams {
            g_eff_mag: f64::INFINITY,
            ..Default::default()
        };
        assert!(matches!(
            validate_params(&p),
            Err(ParamError::NonFinite { .. })
        ));
    }

    #[test]
    fn validate_wraps_phase() {
        let p = EnbsParams {
            pump_phase_1: 7.0,
            ..Default::default()
        };
        let v = validate_params(&p).unwrap();
        assert!((v.pump_phase_1 - (7.0 - TAU)).abs() < 1e-15);
    }

    #[test]
    fn wrap_handles_tiny_negative() {
        let w = wrap_phase(-1e-18);
        assert!((0.0..TAU).contains(&w));
        assert_eq!(wrap_phase(TAU), 0.0);
    }

    #[test]
    fn seed_rejects_negative_amplitude() {
        assert!(SeedField::new(-0.5, 0.0).is_err());
    }

    fn arb_params() -> impl Strategy<Value = EnbsParams> {
        (
            prop::array::uniform6(-20.0f64..20.0),
            0.0f64..5.0,
            0.0f64..5.0,
        )
            .prop_map(|(ph, a1, a2)| EnbsParams {
                g_eff_mag: 1e9,
                pump_phase_1: ph[0],
                pump_phase_2: ph[1],
                signal_phase_1: ph[2],
                signal_phase_2: ph[3],
                seed_1: SeedField {
                    amplitude_mag: a1,
                    phase: ph[4],
                },
                seed_2: SeedField {
                    amplitude_mag: a2,
                    phase: ph[5],
                },
                ..Default::default()
            })
    }

    proptest! {
        #[test]
        fn wrapping_is_idempotent(p in arb_params()) {
            let once = validate_params(&p).unwrap();
            let twice = validate_params(&once).unwrap();
            prop_assert_eq!(once, twice);
            prop_assert_eq!(derive_phases(&once), derive_phases(&twice));
            let raw = derive_phases(&p);
            let norm = derive_phases(&once);
            prop_assert!(close_mod_tau(raw.phi_global, norm.phi_global));
            prop_assert!(close_mod_tau(raw.phi_n_1, norm.phi_n_1));
        }

        #[test]
        fn common_pump_seed_shift_leaves_local_phase(p in arb_params(), delta in -10.0f64..10.0) {
            let mut shifted = p;
            shifted.pump_phase_1 += delta;
            shifted.seed_1.phase += delta;
            let a = derive_phases(&p).phi_n_1;
            let b = derive_phases(&shifted).phi_n_1;
            prop_assert!(close_mod_tau(a, b), "{a} vs {b}");
        }

        #[test]
        fn seed_difference_is_antisymmetric(p in arb_params()) {
            let mut swapped = p;
            std::mem::swap(&mut swapped.seed_1, &mut swapped.seed_2);
            let a = derive_phases(&p).dphi_sd;
            let b = derive_phases(&swapped).dphi_sd;
            prop_assert!(close_mod_tau(a + b, 0.0), "{a} + {b}");
        }
    }
}
