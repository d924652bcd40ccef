//! Link budget and weak-coupling checks for one configuration.

use std::fmt::Write as _;

use mirp_core::constants::{linear_to_db, watt_to_dbm, TWO_PI};
use mirp_core::physics::{
    homodyne_shot_noise, pump_photons_per_bin, resonator_derive, snr_conventional, snr_mirp,
    sr_noise_power, sr_noise_temperature, validate_assumptions, ValidationReport,
};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Ratios evaluated at one pump photon number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReading {
    pub label: String,
    pub pump_photons: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho1_pass: bool,
    pub rho2_pass: bool,
}

impl CouplingReading {
    fn new(label: &str, r: &ValidationReport) -> Self {
        Self {
            label: label.into(),
            pump_photons: r.pump_photons,
            rho1: r.rho1,
            rho2: r.rho2,
            rho1_pass: r.rho1_pass,
            rho2_pass: r.rho2_pass,
        }
    }
}

/// A computed quantity next to its published reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub quantity: String,
    pub quoted: f64,
    pub computed: f64,
    pub agrees: bool,
}

impl Comparison {
    fn ratio(quantity: &str, quoted: f64, computed: f64) -> Self {
        let agrees = (computed / quoted - 1.0).abs() <= 0.1;
        Self { quantity: quantity.into(), quoted, computed, agrees }
    }

    fn db(quantity: &str, quoted: f64, computed: f64) -> Self {
        Self { quantity: quantity.into(), quoted, computed, agrees: (computed - quoted).abs() <= 0.5 }
    }
}

/// Published reference values for the default parameter set.
pub mod quoted {
    pub const RHO1: f64 = 3.1e-7;
    pub const RHO2: f64 = 3.1e-5;
    pub const SHOT_NOISE_DBM: f64 = -25.0;
    pub const SNR_CONVENTIONAL_DB: [f64; 2] = [-74.0, 46.0];
    pub const SNR_MIRP_DB: [f64; 2] = [-59.0, 51.0];
    pub const SNR_UNTRAINED_DB: [f64; 2] = [-69.0, 51.0];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub transmissivity: f64,
    pub impedance_ohm: f64,
    pub quality: f64,
    pub carrier_hz: f64,
    pub loss_rate_over_2pi_hz: f64,
    pub noise_temperature_k: f64,
    pub noise_power_w: f64,
    pub beta: f64,
    pub snr_conventional_db: [f64; 2],
    pub snr_mirp_db: [f64; 2],
    /// Lowest and highest sweep power the SNR columns refer to.
    pub power_range_w: [f64; 2],
    pub shot_noise_dbm: f64,
    pub clearance_db: f64,
    pub clearance_pass: bool,
    /// `P_W τ / ħω` from the pump power.
    pub pump_photons_from_power: f64,
    pub readings: Vec<CouplingReading>,
    pub comparisons: Vec<Comparison>,
    pub pass: bool,
}

pub fn assumption_report(cfg: &ExperimentConfig) -> Result<AssumptionReport> {
    let rf = cfg.rf_chain.params();
    let res = resonator_derive(&rf)?;
    let ring = cfg.ring.params();
    let hp = cfg.homodyne.params();
    let sr = cfg.receiver.params();
    let t_n = sr_noise_temperature(&sr);
    let powers = &cfg.sweep.powers_watt;
    let range = [
        powers.first().copied().unwrap_or(1e-18),
        powers.last().copied().unwrap_or(1e-6),
    ];
    let mirp_db = |p: f64| linear_to_db(snr_mirp(p, ring.beta, res.transmissivity, ring.bin_spacing, res.carrier));
    let conv_db = |p: f64| linear_to_db(snr_conventional(p, &sr));

    let per_mode = cfg.ring.pump_photons_per_mode;
    let total = per_mode * ring.modes as f64;
    let from_power = pump_photons_per_bin(&ring);
    let readings = vec![
        CouplingReading::new("per mode", &validate_assumptions(&ring, &res, &hp, per_mode)),
        CouplingReading::new("all modes", &validate_assumptions(&ring, &res, &hp, total)),
        CouplingReading::new("from pump power", &validate_assumptions(&ring, &res, &hp, from_power)),
    ];
    let shot = homodyne_shot_noise(&hp);
    let clearance_pass = shot.clearance_db > mirp_core::physics::validate::MIN_CLEARANCE_DB;

    let snr_m = [mirp_db(range[0]), mirp_db(range[1])];
    let snr_r = [conv_db(range[0]), conv_db(range[1])];
    let comparisons = vec![
        Comparison::ratio("rho1 (per mode)", quoted::RHO1, readings[0].rho1),
        Comparison::ratio("rho1 (all modes)", quoted::RHO1, readings[1].rho1),
        Comparison::ratio("rho2 (per mode)", quoted::RHO2, readings[0].rho2),
        Comparison::ratio("rho2 (all modes)", quoted::RHO2, readings[1].rho2),
        Comparison::ratio("pump photons, P_W tau / hbar omega vs modes x per-mode", total, from_power),
        Comparison::db("LO shot noise (dBm)", quoted::SHOT_NOISE_DBM, watt_to_dbm(shot.power)),
        Comparison::db("SNR conventional, lowest power (dB)", quoted::SNR_CONVENTIONAL_DB[0], snr_r[0]),
        Comparison::db("SNR conventional, highest power (dB)", quoted::SNR_CONVENTIONAL_DB[1], snr_r[1]),
        Comparison::db("SNR programmed ring, lowest power (dB)", quoted::SNR_MIRP_DB[0], snr_m[0]),
        Comparison::db("SNR programmed ring, highest power (dB)", quoted::SNR_MIRP_DB[1], snr_m[1]),
        Comparison::db("SNR CW ring, lowest power (dB)", quoted::SNR_UNTRAINED_DB[0], snr_m[0]),
        Comparison::db("SNR CW ring, highest power (dB)", quoted::SNR_UNTRAINED_DB[1], snr_m[1]),
    ];
    let pass = readings.iter().all(|r| r.rho1_pass && r.rho2_pass) && clearance_pass;
    Ok(AssumptionReport {
        transmissivity: res.transmissivity,
        impedance_ohm: res.impedance,
        quality: res.quality,
        carrier_hz: res.carrier_hz(),
        loss_rate_over_2pi_hz: res.loss_rate / TWO_PI,
        noise_temperature_k: t_n,
        noise_power_w: sr_noise_power(t_n, sr.bandwidth),
        beta: ring.beta,
        snr_conventional_db: snr_r,
        snr_mirp_db: snr_m,
        power_range_w: range,
        shot_noise_dbm: watt_to_dbm(shot.power),
        clearance_db: shot.clearance_db,
        clearance_pass,
        pump_photons_from_power: from_power,
        readings,
        comparisons,
        pass,
    })
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

impl AssumptionReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let [lo, hi] = self.power_range_w;
        writeln!(w, "antenna transmissivity T   {:.5}", self.transmissivity).unwrap();
        writeln!(w, "tank impedance Z_RF        {:.4} ohm", self.impedance_ohm).unwrap();
        writeln!(w, "quality factor Q           {:.4}", self.quality).unwrap();
        writeln!(w, "carrier                    {:.6e} Hz", self.carrier_hz).unwrap();
        writeln!(w, "tank loss gamma/2pi        {:.6e} Hz", self.loss_rate_over_2pi_hz).unwrap();
        writeln!(w, "receiver noise temp T_n    {:.2} K", self.noise_temperature_k).unwrap();
        writeln!(w, "receiver noise power       {:.3} pW", self.noise_power_w * 1e12).unwrap();
        writeln!(w, "transduction beta          {}", self.beta).unwrap();
        writeln!(
            w,
            "SNR conventional           {:.2} dB @ {lo:e} W .. {:.2} dB @ {hi:e} W",
            self.snr_conventional_db[0], self.snr_conventional_db[1]
        )
        .unwrap();
        writeln!(
            w,
            "SNR programmed ring        {:.2} dB @ {lo:e} W .. {:.2} dB @ {hi:e} W",
            self.snr_mirp_db[0], self.snr_mirp_db[1]
        )
        .unwrap();
        writeln!(
            w,
            "LO shot noise              {:.2} dBm, clearance {:.2} dB  {}",
            self.shot_noise_dbm,
            self.clearance_db,
            flag(self.clearance_pass)
        )
        .unwrap();
        for r in &self.readings {
            writeln!(
                w,
                "rho1 {:<16} {:.3e}  {}   rho2 {:.3e}  {}   (|W|^2 = {:.3e})",
                r.label,
                r.rho1,
                flag(r.rho1_pass),
                r.rho2,
                flag(r.rho2_pass),
                r.pump_photons
            )
            .unwrap();
        }
        writeln!(w, "quoted vs computed:").unwrap();
        for c in &self.comparisons {
            writeln!(
                w,
                "  {:<56} {:>11.4e} {:>11.4e}  {}",
                c.quantity,
                c.quoted,
                c.computed,
                if c.agrees { "agrees" } else { "DIFFERS" }
            )
            .unwrap();
        }
        writeln!(w, "overall                    {}", flag(self.pass)).unwrap();
        s
    }
}
