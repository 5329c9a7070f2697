// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Reduced signal state and wave–particle–entanglement measures.
//!
//! The joint state is a path qubit in the single-photon signal basis
//! `{|1,0⟩, |0,1⟩}` whose branches carry the idler states `|α_j,1⟩|α_j⟩`.
//! Tracing out the idlers leaves a 2×2 density matrix with populations
//! `(1+|α_j|²)/𝒩` and a coherence proportional to the branch fidelity.

use num_complex::Complex64;
use thiserror::Error;

use crate::analytic::{coherent_overlap, fidelity};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QinfoError {
    #[error("V² + P² = {0} exceeds 1")]
    Domain(f64),
    #[error("invalid signal density matrix: {0}")]
    InvalidDensity(String),
}

/// Density matrix over `{|1,0⟩_s, |0,1⟩_s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalDensityMatrix {
    pub rho11: f64,
    pub rho22: f64,
    /// `⟨1,0|ρ|0,1⟩`.
    pub rho12: Complex64,
}

impl SignalDensityMatrix {
    /// Checks unit trace and positivity to 1e-12.
    pub fn new(rho11: f64, rho22: f64, rho12: Complex64) -> Result<Self, QinfoError> {
        let dm = Self {
            rho11,
            rho22,
            rho12,
        };
        if !(rho11.is_finite() && rho22.is_finite() && rho12.is_finite()) {
            return Err(QinfoError::InvalidDensity("non-finite entry".into()));
        }
        if (rho11 + rho22 - 1.0).abs() > 1e-12 {
            return Err(QinfoError::InvalidDensity(format!(
                "trace {}",
                rho11 + rho22
            )));
        }
        if dm.eigenvalues()[0] < -1e-12 {
            return Err(QinfoError::InvalidDensity(
                "not positive semidefinite".into(),
            ));
        }
        Ok(dm)
    }

    /// `|ψ⟩⟨ψ|` for `ψ = c_1|1,0⟩ + c_2|0,1⟩`, normalized.
    pub fn from_pure(amps: [Complex64; 2]) -> Self {
        let n = amps[0].norm_sqr() + amps[1].norm_sqr();
        Self {
            rho11: amps[0].norm_sqr() / n,
            rho22: amps[1].norm_sqr() / n,
            rho12: amps[0] * amps[1].conj() / n,
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let tr = self.rho11 + self.rho22;
        let d = (self.rho11 - self.rho22).hypot(2.0 * self.rho12.norm());
        [(tr - d) / 2.0, (tr + d) / 2.0]
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.rho11, 0.0), self.rho12],
            [self.rho12.conj(), Complex64::new(self.rho22, 0.0)],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialityMeasures {
    pub visibility: f64,
    pub predictability: f64,
    pub entanglement: f64,
    /// `P² + V²`.
    pub mu_s_sq: f64,
    /// `Tr ρ²`.
    pub state_purity: f64,
}

impl TrialityMeasures {
    /// Entanglement under the `E² = 2ρ11ρ22(1−F²)` convention, i.e. `E/√2`.
    pub fn entanglement_factor2(&self) -> f64 {
        self.entanglement / std::f64::consts::SQRT_2
    }
}

/// Reduced signal density matrix of the seeded joint state.
pub fn reduced_signal_dm(alpha1: Complex64, alpha2: Complex64) -> SignalDensityMatrix {
    let w1 = 1.0 + alpha1.norm_sqr();
    let w2 = 1.0 + alpha2.norm_sqr();
    let norm = w1 + w2;
    // ⟨α2,1|α1,1⟩⟨α2|α1⟩ scaled back by √(w1 w2)
    let ov = coherent_overlap(alpha2, alpha1);
    let rho12 = (1.0 + alpha2.conj() * alpha1) * ov * ov / norm;
    SignalDensityMatrix {
        rho11: w1 / norm,
        rho22: w2 / norm,
        rho12,
    }
}

/// `√(4 ρ11 ρ22 (1 − F²))`.
pub fn entanglement_from_fidelity(rho11: f64, rho22: f64, f: f64) -> f64 {
    (4.0 * rho11 * rho22 * (1.0 - f * f)).max(0.0).sqrt()
}

pub fn triality(dm: &SignalDensityMatrix) -> Result<TrialityMeasures, QinfoError> {
    let v = 2.0 * dm.rho12.norm();
    let p = (dm.rho11 - dm.rho22).abs();
    let mu = v * v + p * p;
    if mu > 1.0 + 1e-12 {
        return Err(QinfoError::Domain(mu));
    }
    Ok(TrialityMeasures {
        visibility: v,
        predictability: p,
        entanglement: (1.0 - mu).max(0.0).sqrt(),
        mu_s_sq: mu,
        state_purity: dm.rho11 * dm.rho11 + dm.rho22 * dm.rho22 + 2.0 * dm.rho12.norm_sqr(),
    })
}

/// Triality measures straight from the seeds, with the branch fidelity.
pub fn seeded_triality(alpha1: Complex64, alpha2: Complex64) -> (TrialityMeasures, f64) {
    let dm = reduced_signal_dm(alpha1, alpha2);
    let t = triality(&dm).expect("reduced state is a valid density matrix");
    (t, fidelity(alpha1, alpha2))
}

/// Single-photon path-entangled state `(|1,0⟩ + e^{iΔφ}|0,1⟩)/√2`.
pub fn bell_state_approx(dphi_i: f64) -> [Complex64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [Complex64::new(h, 0.0), Complex64::from_polar(h, dphi_i)]
}

/// Explicit truncated-Fock construction of the joint state, used to check
/// the closed forms above.
pub mod brute_force {
    use num_complex::Complex64;

    use crate::fockspace::{
        coherent_state, fock_state, partial_trace, spacs, superpose, tensor, FockError,
        FockRegister,
    };

    use super::SignalDensityMatrix;

    /// Index of `|1,0⟩` in the two signal modes.
    const ARM1: usize = 2;
    /// Index of `|0,1⟩`.
    const ARM2: usize = 1;

    fn branch_idlers(alpha: Complex64, dim: usize) -> Result<FockRegister, FockError> {
        tensor(&[&spacs(alpha, dim)?, &coherent_state(alpha, dim)?])
    }

    fn signal(first: bool) -> Result<FockRegister, FockError> {
        let (a, b) = if first { (1, 0) } else { (0, 1) };
        tensor(&[&fock_state(a, 2)?, &fock_state(b, 2)?])
    }

    /// Normalized joint state on modes `[s1, s2, idler, auxiliary]` and its
    /// squared norm before normalization.
    pub fn joint_branch_state(
        alpha1: Complex64,
        alpha2: Complex64,
        dim: usize,
    ) -> Result<(FockRegister, f64), FockError> {
        let b1 = tensor(&[&signal(true)?, &branch_idlers(alpha1, dim)?])?;
        let b2 = tensor(&[&signal(false)?, &branch_idlers(alpha2, dim)?])?;
        let w1 = (1.0 + alpha1.norm_sqr()).sqrt();
        let w2 = (1.0 + alpha2.norm_sqr()).sqrt();
        superpose(&[
            (Complex64::new(w1, 0.0), &b1),
            (Complex64::new(w2, 0.0), &b2),
        ])
    }

    /// Partial trace of [`joint_branch_state`] over both idler modes.
    pub fn reduced_dm(
        alpha1: Complex64,
        alpha2: Complex64,
        dim: usize,
    ) -> Result<SignalDensityMatrix, FockError> {
        let (joint, _) = joint_branch_state(alpha1, alpha2, dim)?;
        let red = partial_trace(&joint, &[0, 1])?;
        let m = red
            .density_matrix()
            .expect("partial trace yields a density");
        Ok(SignalDensityMatrix {
            rho11: m[[ARM1, ARM1]].re,
            rho22: m[[ARM2, ARM2]].re,
            rho12: m[[ARM1, ARM2]],
        })
    }

    /// `|⟨α1,1|⟨α1| · |α2,1⟩|α2⟩|` from truncated vectors.
    pub fn branch_fidelity(
        alpha1: Complex64,
        alpha2: Complex64,
        dim: usize,
    ) -> Result<f64, FockError> {
        let b1 = branch_idlers(alpha1, dim)?;
        let b2 = branch_idlers(alpha2, dim)?;
        Ok(b1.inner(&b2)?.norm())
    }
}
