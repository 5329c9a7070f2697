// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Collapse of the 2N+1 signal frequency bins into one supermode.

use num_complex::Complex64;

/// Coefficients `c_n = e^{−iφ_g0}/√(2N+1)` of the uniform supermode.
pub fn supermode_coefficients(n_bins_half: u32, phi_g0: f64) -> Vec<Complex64> {
    let bins = 2 * n_bins_half as usize + 1;
    let c = Complex64::from_polar(1.0 / (bins as f64).sqrt(), -phi_g0);
    vec![c; bins]
}

/// Equal per-bin couplings `g_n = |g_0| e^{iφ_g0}`.
pub fn uniform_bin_couplings(g0_mag: f64, phi_g0: f64, n_bins_half: u32) -> Vec<Complex64> {
    vec![Complex64::from_polar(g0_mag, phi_g0); 2 * n_bins_half as usize + 1]
}

/// Supermode coupling `Σ_n g_n c_n`.
pub fn effective_coupling(bin_couplings: &[Complex64], coefficients: &[Complex64]) -> Complex64 {
    assert_eq!(bin_couplings.len(), coefficients.len());
    bin_couplings
        .iter()
        .zip(coefficients)
        .map(|(g, c)| g * c)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bin() {
        let c = supermode_coefficients(0, 0.7);
        assert_eq!(c.len(), 1);
        assert!((c[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn five_bins() {
        let c = supermode_coefficients(2, 0.0);
        assert_eq!(c.len(), 5);
        for x in &c {
            assert_eq!(*x, Complex64::new(1.0 / 5f64.sqrt(), 0.0));
        }
        let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coupling_scales_with_bin_count() {
        let (g0, phi) = (2.5, 1.1);
        let got = effective_coupling(
            &uniform_bin_couplings(g0, phi, 3),
            &supermode_coefficients(3, phi),
        );
        assert!((got - Complex64::new(g0 * 7f64.sqrt(), 0.0)).norm() < 1e-14);
    }
}
