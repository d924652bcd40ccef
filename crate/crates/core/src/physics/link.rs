//! Closed-form RF link budget: antenna coupling, receiver noise and the
//! per-readout SNR of the three sensing schemes.

use super::params::{CarrierConvention, RfChainParams, SrParams};
use crate::constants::{db_to_linear, HBAR, K_B, TWO_PI};
use crate::error::{domain, Result};

/// Power transmissivity of the antenna into the tank, `4 Z_RF Z_air / (Z_RF + Z_air)²`.
pub fn antenna_transmissivity(z_rf: f64, z_air: f64) -> Result<f64> {
    if !(z_rf > 0.0 && z_air > 0.0) {
        return domain(format!("impedances must be positive (z_rf={z_rf}, z_air={z_air})"));
    }
    let s = z_rf + z_air;
    Ok(4.0 * z_rf * z_air / (s * s))
}

/// Quantities derived from the RLC tank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonator {
    /// Carrier angular frequency Ω (rad/s).
    pub carrier: f64,
    pub impedance: f64,
    pub quality: f64,
    /// Tank loss rate γ (rad/s).
    pub loss_rate: f64,
    pub transmissivity: f64,
}

impl Resonator {
    pub fn carrier_hz(&self) -> f64 {
        self.carrier / TWO_PI
    }

    pub fn loss_rate_hz(&self) -> f64 {
        self.loss_rate / TWO_PI
    }
}

pub fn resonator_derive(p: &RfChainParams) -> Result<Resonator> {
    p.validate()?;
    let impedance = (p.inductance / p.capacitance).sqrt();
    let quality = impedance / p.resistance;
    let inv_sqrt_lc = 1.0 / (p.inductance * p.capacitance).sqrt();
    let carrier = match p.carrier {
        CarrierConvention::Hertz => TWO_PI * inv_sqrt_lc,
        CarrierConvention::Angular => inv_sqrt_lc,
    };
    Ok(Resonator {
        carrier,
        impedance,
        quality,
        loss_rate: carrier / quality,
        transmissivity: antenna_transmissivity(impedance, p.z_air)?,
    })
}

/// Effective input noise temperature of the super-heterodyne chain (K).
pub fn sr_noise_temperature(p: &SrParams) -> f64 {
    let t0 = p.room_temperature;
    let excess = |nf_db: f64| (db_to_linear(nf_db) - 1.0) * t0;
    let line = db_to_linear(p.line_loss_db);
    let mixer = db_to_linear(p.mixer_loss_db);
    let t_rf = excess(p.rf_noise_figure_db);
    let t_mix = excess(p.mixer_noise_figure_db);
    let t_if = excess(p.if_noise_figure_db);
    t0 + (line - 1.0) * t0 + line * (t_rf + t_mix / p.rf_gain + mixer * t_if / p.rf_gain)
}

/// Thermal noise power `k_B T B` (W).
pub fn sr_noise_power(noise_temperature: f64, bandwidth: f64) -> f64 {
    K_B * noise_temperature * bandwidth
}

/// Receiver-limited SNR of conventional sensing, `P_RF / (k_B T_n B)`.
pub fn snr_conventional(p_rf: f64, p: &SrParams) -> f64 {
    p_rf / sr_noise_power(sr_noise_temperature(p), p.bandwidth)
}

/// Mean signal photon number per time bin, `P_RF T Δt / (ħΩ)`.
pub fn photons_per_bin(p_rf: f64, transmissivity: f64, bin_spacing: f64, carrier: f64) -> f64 {
    p_rf * transmissivity * bin_spacing / (HBAR * carrier)
}

/// Homodyne measurement SNR of a programmed micro-ring readout, `4β n_sig`.
pub fn snr_mirp(p_rf: f64, beta: f64, transmissivity: f64, bin_spacing: f64, carrier: f64) -> f64 {
    4.0 * beta * photons_per_bin(p_rf, transmissivity, bin_spacing, carrier)
}

/// SNR of the CW-pumped ring. Same closed form as [`snr_mirp`] since the CW
/// pump carries the same RMS field.
pub fn snr_untrained(
    p_rf: f64,
    beta: f64,
    transmissivity: f64,
    bin_spacing: f64,
    carrier: f64,
) -> f64 {
    snr_mirp(p_rf, beta, transmissivity, bin_spacing, carrier)
}
