// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form observables of the seeded two-unit source.
//!
//! Everything here is a pure function of the parameters. The photon number
//! carries the phenomenological `exp(−κ_s t)` damping factor; exact damped
//! dynamics live in [`crate::dynamics`].

use num_complex::Complex64;
use thiserror::Error;

use crate::params::{derive_phases, Arm, EnbsParams, SeedField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("gain argument |g|t = {arg} exceeds bound {bound}")]
    Overflow { arg: f64, bound: f64 },
    #[error("time must be nonnegative and finite, got {0}")]
    InvalidTime(f64),
}

/// Numerical guards for the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Largest accepted `|g| t`.
    pub max_gain_arg: f64,
    /// Photon numbers below this count as zero in g².
    pub divergence_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            max_gain_arg: 30.0,
            divergence_floor: 1e-12,
        }
    }
}

/// Zero-delay second-order coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum G2Value {
    Finite(f64),
    /// Vanishing signal with a nonzero correlation numerator.
    Divergent,
}

impl G2Value {
    pub fn finite(self) -> Option<f64> {
        match self {
            G2Value::Finite(v) => Some(v),
            G2Value::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, G2Value::Divergent)
    }
}

/// Closed-form observables at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservablePoint {
    pub time: f64,
    pub n_sig_1: f64,
    pub n_sig_2: f64,
    pub g2: G2Value,
    /// `n_sig_1 + n_sig_2`.
    pub n_sum: f64,
    /// Fringe amplitude `2|⟨A_1† A_2⟩|`.
    pub interference_mag: f64,
}

fn check_time(t: f64, g: f64, th: &Thresholds) -> Result<f64, AnalyticError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(AnalyticError::InvalidTime(t));
    }
    let arg = g * t;
    if arg > th.max_gain_arg {
        return Err(AnalyticError::Overflow {
            arg,
            bound: th.max_gain_arg,
        });
    }
    Ok(arg)
}

/// Mean signal photon number
/// `[1 + |α|² + 2|α| cos Φ_N] sinh²(|g| t) e^{−κ_s t}`.
pub fn n_sig(
    t: f64,
    seed: SeedField,
    phi_n: f64,
    g_eff_mag: f64,
    kappa_s: f64,
) -> Result<f64, AnalyticError> {
    n_sig_with(t, seed, phi_n, g_eff_mag, kappa_s, &Thresholds::default())
}

pub fn n_sig_with(
    t: f64,
    seed: SeedField,
    phi_n: f64,
    g_eff_mag: f64,
    kappa_s: f64,
    th: &Thresholds,
) -> Result<f64, AnalyticError> {
    let arg = check_time(t, g_eff_mag, th)?;
    let a = seed.amplitude_mag;
    // equals |1 + a e^{iΦ_N}|²; the clamp only removes rounding below zero
    let prefactor = (1.0 + a * a + 2.0 * a * phi_n.cos()).max(0.0);
    let s = arg.sinh();
    Ok(prefactor * s * s * (-kappa_s * t).exp())
}

/// `⟨α1|α2⟩ = exp(−|α1−α2|²/2) exp(i Im(α1* α2))`.
pub fn coherent_overlap(alpha1: Complex64, alpha2: Complex64) -> Complex64 {
    let mag = (-(alpha1 - alpha2).norm_sqr() / 2.0).exp();
    let phase = (alpha1.conj() * alpha2).im;
    Complex64::from_polar(mag, phase)
}

/// Conditional overlap of the two idler branches,
/// `|α1* α2 + 1| / √((1+|α1|²)(1+|α2|²)) · exp(−|α1−α2|²)`.
pub fn fidelity(alpha1: Complex64, alpha2: Complex64) -> f64 {
    let num = (alpha1.conj() * alpha2 + 1.0).norm();
    let den = ((1.0 + alpha1.norm_sqr()) * (1.0 + alpha2.norm_sqr())).sqrt();
    (num / den * (-(alpha1 - alpha2).norm_sqr()).exp()).min(1.0)
}

/// [`fidelity`] for equal seed magnitudes and phase difference `dphi_sd`.
pub fn fidelity_symmetric(alpha_mag: f64, dphi_sd: f64) -> f64 {
    let a2 = alpha_mag * alpha_mag;
    let c = dphi_sd.cos();
    // |a² e^{iΔ} + 1|, written so Δ = π at |α| = 1 is an exact zero
    let num = ((a2 - 1.0).powi(2) + 2.0 * a2 * (1.0 + c)).sqrt();
    (num / (1.0 + a2) * (-2.0 * a2 * (1.0 - c)).exp()).min(1.0)
}

/// Zero-delay second-order coherence of the combined signal,
/// `1 + F |α1|²|α2|² sin²Φ / (N_1 N_2)`.
pub fn g2_zero_delay(t: f64, params: &EnbsParams) -> Result<G2Value, AnalyticError> {
    g2_zero_delay_with(t, params, &Thresholds::default())
}

pub fn g2_zero_delay_with(
    t: f64,
    params: &EnbsParams,
    th: &Thresholds,
) -> Result<G2Value, AnalyticError> {
    let phases = derive_phases(params);
    let [n1, n2] = n_sig_pair(t, params, th)?;
    let a1 = params.seed_1.amplitude();
    let a2 = params.seed_2.amplitude();
    let f = fidelity(a1, a2);
    let s = phases.phi_global.sin();
    let numerator = f * a1.norm_sqr() * a2.norm_sqr() * s * s;
    if n1.min(n2) < th.divergence_floor {
        if numerator > 0.0 {
            return Ok(G2Value::Divergent);
        }
        return Ok(G2Value::Finite(1.0));
    }
    Ok(G2Value::Finite(1.0 + numerator / (n1 * n2)))
}

fn n_sig_pair(t: f64, params: &EnbsParams, th: &Thresholds) -> Result<[f64; 2], AnalyticError> {
    let phases = derive_phases(params);
    let mut out = [0.0; 2];
    for arm in Arm::BOTH {
        out[arm.index()] = n_sig_with(
            t,
            params.seed(arm),
            phases.phi_n(arm),
            params.g_eff_mag,
            params.kappa_s,
            th,
        )?;
    }
    Ok(out)
}

/// Single-output count rate `n1 + n2 + 2 Re[e^{iΔφ_sd} ⟨A_1† A_2⟩]`.
pub fn detection_rate(dphi_sd: f64, n1: f64, n2: f64, cross: Complex64) -> f64 {
    n1 + n2 + 2.0 * (Complex64::from_polar(1.0, dphi_sd) * cross).re
}

/// Fringe visibility `2|cross| / (n1 + n2)`; `None` without signal.
pub fn visibility(n1: f64, n2: f64, cross: Complex64) -> Option<f64> {
    let s = n1 + n2;
    (s > 0.0).then(|| 2.0 * cross.norm() / s)
}

/// Signal first moment `⟨A(t)⟩` of one unit with vacuum signal and coherent
/// idler seed, including amplitude damping at rates κ_s/2 and κ_i/2.
pub fn signal_first_moment(
    t: f64,
    seed: Complex64,
    pump_phase: f64,
    g_eff_mag: f64,
    kappa_s: f64,
    kappa_i: f64,
) -> Complex64 {
    let mean_decay = (kappa_s + kappa_i) / 4.0;
    let delta = (kappa_s - kappa_i) / 4.0;
    let omega = (delta * delta + g_eff_mag * g_eff_mag).sqrt();
    let growth = if omega > 0.0 {
        (omega * t).sinh() / omega
    } else {
        t
    };
    let coupling = Complex64::new(0.0, -g_eff_mag) * Complex64::from_polar(1.0, pump_phase);
    coupling * seed.conj() * growth * (-mean_decay * t).exp()
}

/// Cross correlator `⟨A_1†(t) A_2(t)⟩ = ⟨A_1⟩* ⟨A_2⟩` for independent units.
pub fn cross_correlator(t: f64, params: &EnbsParams) -> Result<Complex64, AnalyticError> {
    check_time(t, params.g_eff_mag, &Thresholds::default())?;
    let m = |arm: Arm| {
        signal_first_moment(
            t,
            params.seed(arm).amplitude(),
            params.pump_phase(arm),
            params.g_eff_mag,
            params.kappa_s,
            params.kappa_i,
        )
    };
    Ok(m(Arm::One).conj() * m(Arm::Two))
}

pub fn observable_point(t: f64, params: &EnbsParams) -> Result<ObservablePoint, AnalyticError> {
    let th = Thresholds::default();
    let [n1, n2] = n_sig_pair(t, params, &th)?;
    let g2 = g2_zero_delay_with(t, params, &th)?;
    let cross = cross_correlator(t, params)?;
    Ok(ObservablePoint {
        time: t,
        n_sig_1: n1,
        n_sig_2: n2,
        g2,
        n_sum: n1 + n2,
        interference_mag: 2.0 * cross.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};

    const G: f64 = TAU * 1e9;
    const T75: f64 = 75e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn seed(mag: f64) -> SeedField {
        SeedField::new(mag, 0.0).unwrap()
    }

    fn symmetric(mag: f64, phi_global: f64) -> EnbsParams {
        EnbsParams {
            g_eff_mag: G,
            seed_1: seed(mag),
            seed_2: seed(mag),
            signal_phase_1: -phi_global,
            ..EnbsParams::default()
        }
    }

    #[test]
    fn n_sig_vanishes_at_t0() {
        assert_eq!(n_sig(0.0, seed(3.0), 0.4, G, 1e9).unwrap(), 0.0);
    }

    #[test]
    fn n_sig_exact_cancellation() {
        for t in [1e-12, 5e-11, 2e-10] {
            let n = n_sig(t, seed(1.0), PI, G, 0.0).unwrap();
            assert_eq!(n, 0.0);
        }
    }

    #[test]
    fn n_sig_reference_values() {
        assert_relative_eq!(
            n_sig(T75, seed(5.0), 0.0, G, 0.0).unwrap(),
            8.603_941_793_251_34,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            n_sig(T75, seed(5.0), 0.0, G, TAU * 3e9).unwrap(),
            2.092_801_820_540_929,
            max_relative = 1e-12
        );
    }

    #[test]
    fn n_sig_overflow_guard() {
        let err = n_sig(31.0 / G, seed(1.0), 0.0, G, 0.0).unwrap_err();
        assert!(matches!(err, AnalyticError::Overflow { .. }));
        assert!(n_sig(-1.0, seed(1.0), 0.0, G, 0.0).is_err());
    }

    #[test]
    fn coherent_overlap_examples() {
        assert_relative_eq!(coherent_overlap(c(0.3, 0.2), c(0.3, 0.2)).re, 1.0);
        let z = coherent_overlap(c(1.0, 0.0), c(0.0, 0.0));
        assert_relative_eq!(z.re, (-0.5f64).exp(), max_relative = 1e-15);
        assert_eq!(z.im, 0.0);
        let z = coherent_overlap(c(0.0, 1.0), c(1.0, 0.0));
        assert_relative_eq!(z.norm(), (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(z.arg(), -1.0, max_relative = 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        assert_eq!(fidelity(c(1.3, -0.4), c(1.3, -0.4)), 1.0);
        assert_eq!(fidelity(c(-1.0, 0.0), c(1.0, 0.0)), 0.0);
        assert_relative_eq!(
            fidelity(Complex64::from_polar(2.0, PI), c(2.0, 0.0)),
            6.752_110_483_155_547e-8,
            max_relative = 1e-10
        );
    }

    #[test]
    fn fidelity_symmetric_examples() {
        assert_eq!(fidelity_symmetric(3.0, 0.0), 1.0);
        assert_eq!(fidelity_symmetric(1.0, PI), 0.0);
        assert_eq!(fidelity_symmetric(2.0, TAU), 1.0);
        assert_relative_eq!(
            fidelity_symmetric(1.0, FRAC_PI_2),
            0.095_696_496_510_410_92,
            max_relative = 1e-13
        );
    }

    #[test]
    fn g2_is_one_without_global_phase() {
        let p = symmetric(2.0, 0.0);
        assert_eq!(g2_zero_delay(T75, &p).unwrap(), G2Value::Finite(1.0));
    }

    #[test]
    fn g2_reference_value() {
        let p = symmetric(2.0, FRAC_PI_2);
        assert_relative_eq!(derive_phases(&p).phi_global, FRAC_PI_2);
        let g2 = g2_zero_delay(T75, &p).unwrap().finite().unwrap();
        assert_relative_eq!(g2, 4.458_159_640_917_79, max_relative = 1e-12);
    }

    #[test]
    fn g2_divergent_without_signal() {
        let mut p = symmetric(1.0, FRAC_PI_2);
        p.pump_phase_1 = PI;
        p.pump_phase_2 = PI;
        p.signal_phase_1 = 0.0;
        p.seed_1.phase = 0.0;
        // Φ_N = π on both arms, Φ = π/2 via the signal phase of arm 2
        p.signal_phase_2 = FRAC_PI_2;
        assert_relative_eq!(derive_phases(&p).phi_global, FRAC_PI_2);
        assert_eq!(g2_zero_delay(T75, &p).unwrap(), G2Value::Divergent);
    }

    #[test]
    fn detection_rate_examples() {
        for d in [0.0, 1.0, 2.5] {
            assert_eq!(detection_rate(d, 0.7, 1.1, c(0.0, 0.0)), 0.7 + 1.1);
        }
        assert!(detection_rate(PI, 1.0, 1.0, c(1.0, 0.0)).abs() < 1e-15);
        assert_eq!(detection_rate(0.0, 1.0, 1.0, c(1.0, 0.0)), 4.0);
        assert_eq!(visibility(1.0, 1.0, c(1.0, 0.0)), Some(1.0));
        assert_eq!(visibility(0.0, 0.0, c(0.0, 0.0)), None);
    }

    #[test]
    fn cross_correlator_examples() {
        let mut p = symmetric(2.0, 0.0);
        assert_eq!(cross_correlator(0.0, &p).unwrap(), c(0.0, 0.0));
        p.seed_1.phase = FRAC_PI_3;
        let got = cross_correlator(0.3 / G, &p).unwrap();
        assert_relative_eq!(got.re, 0.185_465_218_242_267_72, max_relative = 1e-12);
        assert_relative_eq!(got.im, 0.321_235_181_032_457_8, max_relative = 1e-12);
        let unseeded = symmetric(0.0, 0.0);
        assert_eq!(cross_correlator(1e-10, &unseeded).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn first_moment_undamped_limit() {
        let alpha = Complex64::from_polar(1.5, 0.7);
        let m = signal_first_moment(0.4 / G, alpha, 1.1, G, 0.0, 0.0);
        let want = c(0.0, -1.0) * Complex64::from_polar(1.0, 1.1) * 0.4f64.sinh() * alpha.conj();
        assert!((m - want).norm() < 1e-14);
    }

    #[test]
    fn first_moment_without_gain_is_zero() {
        let m = signal_first_moment(1e-9, c(1.0, 0.0), 0.0, 0.0, 1e9, 1e9);
        assert_eq!(m, c(0.0, 0.0));
    }

    #[test]
    fn observable_point_fields() {
        let p = symmetric(2.0, FRAC_PI_2);
        let o = observable_point(T75, &p).unwrap();
        assert_eq!(o.n_sum, o.n_sig_1 + o.n_sig_2);
        assert_relative_eq!(o.n_sig_1, 2.150_985_448_312_835, max_relative = 1e-12);
        assert!(!o.g2.is_divergent());
    }

    #[test]
    fn fidelity_minimum_at_pi() {
        for mag in [0.5, 1.0, 2.0, 4.0] {
            let n = 6284;
            let (imin, _) = (0..n)
                .map(|i| (i, fidelity_symmetric(mag, TAU * i as f64 / n as f64)))
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, f)| if f < acc.1 { (i, f) } else { acc },
                );
            let at = TAU * imin as f64 / n as f64;
            assert!((at - PI).abs() <= 1e-3, "|α| = {mag}: argmin {at}");
        }
    }

    proptest! {
        #[test]
        fn symmetric_matches_general(mag in 0.0f64..5.0, d in 0.0f64..TAU) {
            let general = fidelity(Complex64::from_polar(mag, d), c(mag, 0.0));
            prop_assert!((fidelity_symmetric(mag, d) - general).abs() <= 1e-12);
        }

        #[test]
        fn fidelity_bounded_periodic_even(mag in 0.0f64..6.0, d in 0.0f64..TAU) {
            let f = fidelity_symmetric(mag, d);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f - fidelity_symmetric(mag, d + TAU)).abs() <= 1e-12);
            prop_assert!((f - fidelity_symmetric(mag, TAU - d)).abs() <= 1e-12);
        }

        #[test]
        fn general_fidelity_bounded(
            r1 in 0.0f64..4.0, p1 in 0.0f64..TAU, r2 in 0.0f64..4.0, p2 in 0.0f64..TAU,
        ) {
            let f = fidelity(Complex64::from_polar(r1, p1), Complex64::from_polar(r2, p2));
            prop_assert!((0.0..=1.0).contains(&f));
        }

        #[test]
        fn n_sig_monotone_and_damped_below(
            mag in 0.0f64..5.0, phi in 0.0f64..TAU, gt in 0.0f64..5.0, dgt in 0.0f64..1.0,
            kappa_ratio in 0.0f64..5.0,
        ) {
            let t = gt / G;
            let t2 = (gt + dgt) / G;
            let n1 = n_sig(t, seed(mag), phi, G, 0.0).unwrap();
            let n2 = n_sig(t2, seed(mag), phi, G, 0.0).unwrap();
            prop_assert!(n1 >= 0.0 && n2 >= n1);
            let damped = n_sig(t, seed(mag), phi, G, kappa_ratio * G).unwrap();
            prop_assert!(damped <= n1);
        }

        #[test]
        fn g2_never_antibunched(
            m1 in 0.0f64..4.0, m2 in 0.0f64..4.0,
            p1 in 0.0f64..TAU, a1 in 0.0f64..TAU, s1 in 0.0f64..TAU, gt in 0.01f64..3.0,
        ) {
            let p = EnbsParams {
                g_eff_mag: G,
                pump_phase_1: p1,
                signal_phase_1: s1,
                seed_1: SeedField::new(m1, a1).unwrap(),
                seed_2: seed(m2),
                ..EnbsParams::default()
            };
            if let G2Value::Finite(v) = g2_zero_delay(gt / G, &p).unwrap() {
                prop_assert!(v >= 1.0);
            }
        }

        #[test]
        fn rate_averages_to_photon_sum(
            n1 in 0.0f64..10.0, n2 in 0.0f64..10.0, re in -3.0f64..3.0, im in -3.0f64..3.0,
        ) {
            let k = 64;
            let mean = (0..k)
                .map(|i| detection_rate(TAU * i as f64 / k as f64, n1, n2, c(re, im)))
                .sum::<f64>() / k as f64;
            prop_assert!((mean - (n1 + n2)).abs() <= 1e-12 * (1.0 + n1 + n2));
        }
    }
}
