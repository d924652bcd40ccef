//! Optical power budget checks: LO shot noise, transduction efficiency and
//! the weak-coupling ratios the mean-field model relies on.

use super::link::Resonator;
use super::params::{HomodyneParams, RingParams};
use crate::constants::{linear_to_db, HBAR, Q_E};

/// Photodiode responsivity `η q_e / (ħω)` (A/W).
pub fn responsivity(hp: &HomodyneParams) -> f64 {
    hp.quantum_efficiency * Q_E / (HBAR * hp.lo_frequency)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoise {
    pub photocurrent: f64,
    /// LO shot-noise power at the transimpedance output (W).
    pub power: f64,
    /// `P_shot / P_HR` in dB; `-inf` without LO.
    pub clearance_db: f64,
}

/// Shot noise of the LO photocurrent, `P_shot = 2 q_e G² i_ph Δf / Z_HR`:
/// the current noise density `2 q_e i_ph` over `Δf`, converted to voltage by
/// the transimpedance gain and dissipated in the detector impedance.
pub fn homodyne_shot_noise(hp: &HomodyneParams) -> ShotNoise {
    let photocurrent = responsivity(hp) * hp.lo_power;
    let g = hp.transimpedance_gain;
    let power = 2.0 * Q_E * g * g * photocurrent * hp.bandwidth / hp.impedance;
    ShotNoise {
        photocurrent,
        power,
        clearance_db: linear_to_db(power / hp.electronic_noise_power),
    }
}

/// Transduction efficiency `β = 4 μ² T g² |W_rms|² / γ²`.
pub fn beta_from_params(mu: f64, transmissivity: f64, coupling: f64, w_rms: f64, loss_rate: f64) -> f64 {
    4.0 * mu * mu * transmissivity * coupling * coupling * w_rms * w_rms / (loss_rate * loss_rate)
}

/// Inverse of [`beta_from_params`] for the transduction coupling rate `μ`.
pub fn mu_from_beta(beta: f64, transmissivity: f64, coupling: f64, w_rms: f64, loss_rate: f64) -> f64 {
    (beta * loss_rate * loss_rate / (4.0 * transmissivity * coupling * coupling * w_rms * w_rms)).sqrt()
}

/// Pump photons per time bin summed over modes, `P_W τ / (ħω)`.
pub fn pump_photons_per_bin(ring: &RingParams) -> f64 {
    ring.pump_power * ring.pulse_width / (HBAR * ring.base_frequency)
}

pub const MAX_COUPLING_RATIO: f64 = 1e-2;
pub const MIN_CLEARANCE_DB: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    /// Pump photon number per mode `|W_rms|²` the ratios were evaluated at.
    pub pump_photons: f64,
    /// Weak three-wave-mixing ratio `2 g² |W_rms|² / (γ Γ)`.
    pub rho1: f64,
    /// Thermal-noise ratio `g² |W_rms|² (2 n_B + 1) / Γ²`.
    pub rho2: f64,
    /// LO shot-noise clearance over electronic noise (dB).
    pub clearance_db: f64,
    pub rho1_pass: bool,
    pub rho2_pass: bool,
    pub clearance_pass: bool,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.rho1_pass && self.rho2_pass && self.clearance_pass
    }
}

pub fn validate_assumptions(
    ring: &RingParams,
    resonator: &Resonator,
    hp: &HomodyneParams,
    pump_photons: f64,
) -> ValidationReport {
    let g2 = ring.coupling * ring.coupling;
    let gamma_ring = ring.linewidth;
    let rho1 = 2.0 * g2 * pump_photons / (resonator.loss_rate * gamma_ring);
    let rho2 = g2 * pump_photons * (2.0 * ring.thermal_occupation + 1.0) / (gamma_ring * gamma_ring);
    let clearance_db = homodyne_shot_noise(hp).clearance_db;
    ValidationReport {
        pump_photons,
        rho1,
        rho2,
        clearance_db,
        rho1_pass: rho1 < MAX_COUPLING_RATIO,
        rho2_pass: rho2 < MAX_COUPLING_RATIO,
        clearance_pass: clearance_db > MIN_CLEARANCE_DB,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::watt_to_dbm;
    use crate::physics::link::resonator_derive;
    use crate::physics::params::RfChainParams;

    #[test]
    fn shot_noise_defaults() {
        let s = homodyne_shot_noise(&HomodyneParams::default());
        assert!((responsivity(&HomodyneParams::default()) - 1.24).abs() < 0.01);
        assert!((watt_to_dbm(s.power) + 25.0).abs() < 0.2, "{}", watt_to_dbm(s.power));
        assert!((s.clearance_db - 45.0).abs() < 0.2, "{}", s.clearance_db);
    }

    #[test]
    fn no_lo_no_clearance() {
        let hp = HomodyneParams { lo_power: 0.0, ..Default::default() };
        let s = homodyne_shot_noise(&hp);
        assert_eq!(s.power, 0.0);
        assert_eq!(s.clearance_db, f64::NEG_INFINITY);
    }

    #[test]
    fn ratios_at_defaults() {
        let ring = RingParams::default();
        let res = resonator_derive(&RfChainParams::default()).unwrap();
        let hp = HomodyneParams::default();
        let per_mode = validate_assumptions(&ring, &res, &hp, 3.9e4);
        assert!((per_mode.rho1 - 1.95e-9).abs() / 1.95e-9 < 1e-3);
        assert!((per_mode.rho2 - 1.94e-6).abs() / 1.94e-6 < 1e-2);
        assert!(per_mode.pass());
        let total = validate_assumptions(&ring, &res, &hp, 6.2e5);
        assert!((total.rho2 - 3.1e-5).abs() / 3.1e-5 < 0.01);
        assert!(total.pass());
    }

    #[test]
    fn zero_coupling_passes() {
        let ring = RingParams { coupling: 0.0, ..Default::default() };
        let res = resonator_derive(&RfChainParams::default()).unwrap();
        let r = validate_assumptions(&ring, &res, &HomodyneParams::default(), 3.9e4);
        assert_eq!((r.rho1, r.rho2), (0.0, 0.0));
        assert!(r.pass());
    }

    #[test]
    fn beta_round_trip_and_scaling() {
        let (t, g, w, gamma) = (0.2333, std::f64::consts::TAU * 1e3, 197.5, std::f64::consts::TAU * 20e9);
        assert_eq!(beta_from_params(0.0, t, g, w, gamma), 0.0);
        let mu = mu_from_beta(0.0118, t, g, w, gamma);
        let back = beta_from_params(mu, t, g, w, gamma);
        assert!((back - 0.0118).abs() / 0.0118 < 1e-12);
        let b1 = beta_from_params(mu, t, g, w, gamma);
        let b2 = beta_from_params(mu, t, g, 2.0 * w, gamma);
        assert!((b2 / b1 - 4.0).abs() < 1e-12);
    }
}
