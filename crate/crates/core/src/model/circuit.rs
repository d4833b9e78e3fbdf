use std::f64::consts::PI;

use crate::constants::HBAR;

/// Mean intracavity photon number of a notch resonator driven on resonance:
/// ⟨n⟩ = 2 P Q_l² / (|Q_c| ħ ω_r²).
///
/// Conventions in the literature differ by O(1) geometry factors; reports
/// produced by this crate always state this one.
pub fn photon_number(feed_power: f64, f_r: f64, q_l: f64, qc_mag: f64) -> f64 {
    let omega = 2.0 * PI * f_r;
    2.0 * feed_power * q_l * q_l / (qc_mag * HBAR * omega * omega)
}

/// Inverse of [`photon_number`]: the feedline power, W, giving `n` photons.
pub fn feed_power_for_photons(n: f64, f_r: f64, q_l: f64, qc_mag: f64) -> f64 {
    let omega = 2.0 * PI * f_r;
    n * qc_mag * HBAR * omega * omega / (2.0 * q_l * q_l)
}

/// f_r = 1 / (2π √(L (C_C + C_L)))
pub fn resonance_frequency(inductance: f64, shunt_capacitance: f64, coupling_capacitance: f64) -> f64 {
    1.0 / (2.0 * PI * (inductance * (coupling_capacitance + shunt_capacitance)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{dbm_to_watts, watts_to_dbm};

    #[test]
    fn photon_number_example_device() {
        let n = photon_number(1e-17, 5e9, 1e5, 2e5);
        // 2e-7 / (2e5 * hbar * (2π·5e9)²)
        let expected = 2e-7 / (2e5 * HBAR * (2.0 * PI * 5e9).powi(2));
        assert_eq!(n, expected);
        assert!((n - 9.61).abs() < 0.01);

        let p1 = feed_power_for_photons(1.0, 5e9, 1e5, 2e5);
        assert!((p1 - 1.04e-18).abs() < 0.01e-18);
        assert!((watts_to_dbm(p1) + 149.8).abs() < 0.05);
        assert!((photon_number(dbm_to_watts(-149.8), 5e9, 1e5, 2e5) - 1.0).abs() < 0.02);
    }

    #[test]
    fn photon_number_is_linear() {
        let a = photon_number(3.3e-16, 6.1e9, 4e4, 9e4);
        let b = photon_number(6.6e-16, 6.1e9, 4e4, 9e4);
        assert!((b - 2.0 * a).abs() <= 1e-12 * b);
    }

    #[test]
    fn lc_resonance() {
        let f = resonance_frequency(1e-9, 0.0, 1.0132e-12);
        assert!((f - 5e9).abs() / 5e9 < 1e-4);
        let f4 = resonance_frequency(4e-9, 0.0, 1.0132e-12);
        assert!((f4 - f / 2.0).abs() <= 1e-15 * f);
        assert_eq!(
            resonance_frequency(1e-9, 3e-14, 1e-12),
            resonance_frequency(1e-9, 1e-12, 3e-14)
        );
    }
}
