use crate::constants::{Z_AIR, TWO_PI};
use crate::error::{domain, Result};

/// How `1/sqrt(L·C)` of the RLC tank is read.
///
/// `Hertz` treats it as the carrier frequency `Ω/2π` (so 4 pF / 2.5 nH gives a
/// 10 GHz carrier). `Angular` treats it as the angular frequency `Ω`, which is
/// the textbook resonance relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CarrierConvention {
    #[default]
    Hertz,
    Angular,
}

/// Antenna-coupled RLC tank that turns the incident RF field into a
/// modulation voltage on the ring.
#[derive(Debug, Clone, PartialEq)]
pub struct RfChainParams {
    pub capacitance: f64,
    pub inductance: f64,
    pub resistance: f64,
    pub z_air: f64,
    pub carrier: CarrierConvention,
}

impl Default for RfChainParams {
    fn default() -> Self {
        Self {
            capacitance: 4e-12,
            inductance: 2.5e-9,
            resistance: 50.0,
            z_air: Z_AIR,
            carrier: CarrierConvention::Hertz,
        }
    }
}

impl RfChainParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("capacitance", self.capacitance),
            ("inductance", self.inductance),
            ("resistance", self.resistance),
            ("z_air", self.z_air),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("rf chain {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// Micro-ring, pump and time-bin parameters. Rates are angular (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct RingParams {
    /// Ring loss rate Γ.
    pub linewidth: f64,
    /// Three-wave-mixing coupling g.
    pub coupling: f64,
    /// RF-to-optics transduction efficiency β.
    pub beta: f64,
    /// Thermal RF occupation n_B.
    pub thermal_occupation: f64,
    /// Time-bin spacing Δt (s); `1/Δt` is the Nyquist rate of the envelope.
    pub bin_spacing: f64,
    /// Pump pulse width τ (s).
    pub pulse_width: f64,
    /// Number of frequency-multiplexed pump modes L.
    pub modes: usize,
    pub base_frequency: f64,
    pub mode_spacing: f64,
    /// Average pump power per time bin (W).
    pub pump_power: f64,
}

impl Default for RingParams {
    fn default() -> Self {
        Self {
            linewidth: TWO_PI * 2e9,
            coupling: TWO_PI * 1e3,
            beta: 0.0118,
            thermal_occupation: 99.0,
            bin_spacing: 0.5e-9,
            pulse_width: 50e-12,
            modes: 16,
            base_frequency: TWO_PI * 193e12,
            mode_spacing: TWO_PI * 100e9,
            pump_power: 10e-3,
        }
    }
}

impl RingParams {
    pub fn validate(&self) -> Result<()> {
        if self.linewidth.is_nan() || self.linewidth < 0.0 {
            return domain(format!("ring linewidth must be >= 0, got {}", self.linewidth));
        }
        if !(self.bin_spacing > 0.0 && self.bin_spacing.is_finite()) {
            return domain("time-bin spacing must be positive");
        }
        if !(self.pulse_width > 0.0) {
            return domain("pulse width must be positive");
        }
        if self.pulse_width > self.bin_spacing / 5.0 {
            return domain(format!(
                "pulse width {} s is not short against the bin spacing {} s (need tau <= dt/5)",
                self.pulse_width, self.bin_spacing
            ));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return domain(format!("transduction efficiency must lie in (0,1), got {}", self.beta));
        }
        if self.modes == 0 {
            return domain("at least one pump mode is required");
        }
        if !(self.thermal_occupation >= 0.0) {
            return domain("thermal occupation must be >= 0");
        }
        if !(self.coupling >= 0.0) {
            return domain("coupling rate must be >= 0");
        }
        Ok(())
    }

    /// Per-bin decay factor `exp(-Γ·Δt/2)` of the damped kernel.
    pub fn decay(&self) -> f64 {
        decay_factor(self.linewidth, self.bin_spacing)
    }

    /// Frequency of pump mode `l` (0-based), rad/s.
    pub fn mode_frequency(&self, l: usize) -> f64 {
        self.base_frequency + self.mode_spacing * l as f64
    }
}

/// `exp(-Γ·Δt/2)`; Γ = 0 gives 1 and Γ = ∞ gives 0.
pub fn decay_factor(linewidth: f64, bin_spacing: f64) -> f64 {
    (-linewidth * bin_spacing / 2.0).exp()
}

/// Balanced homodyne receiver reading one product mode.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneParams {
    pub lo_power: f64,
    /// Electronic noise power P_HR (W).
    pub electronic_noise_power: f64,
    pub impedance: f64,
    pub transimpedance_gain: f64,
    pub quantum_efficiency: f64,
    pub bandwidth: f64,
    /// LO optical angular frequency, sets the photodiode responsivity.
    pub lo_frequency: f64,
}

impl Default for HomodyneParams {
    fn default() -> Self {
        Self {
            lo_power: 25e-3,
            electronic_noise_power: 1e-10, // -70 dBm
            impedance: 50.0,
            transimpedance_gain: 2.8e3,
            quantum_efficiency: 0.99,
            bandwidth: 2e9,
            lo_frequency: TWO_PI * 193e12,
        }
    }
}

impl HomodyneParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.quantum_efficiency > 0.0 && self.quantum_efficiency <= 1.0) {
            return domain("quantum efficiency must lie in (0,1]");
        }
        if !(self.lo_power >= 0.0) {
            return domain("LO power must be >= 0");
        }
        for (name, v) in [
            ("electronic noise power", self.electronic_noise_power),
            ("impedance", self.impedance),
            ("transimpedance gain", self.transimpedance_gain),
            ("bandwidth", self.bandwidth),
            ("LO frequency", self.lo_frequency),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("homodyne {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// Super-heterodyne receiver chain: line → RF amp → mixer → IF amp.
#[derive(Debug, Clone, PartialEq)]
pub struct SrParams {
    /// RF amplifier gain, linear.
    pub rf_gain: f64,
    pub rf_noise_figure_db: f64,
    pub line_loss_db: f64,
    pub mixer_loss_db: f64,
    pub mixer_noise_figure_db: f64,
    pub if_noise_figure_db: f64,
    pub bandwidth: f64,
    pub room_temperature: f64,
}

impl Default for SrParams {
    fn default() -> Self {
        Self {
            rf_gain: 100.0,
            rf_noise_figure_db: 3.0,
            line_loss_db: 1.5,
            mixer_loss_db: 7.0,
            mixer_noise_figure_db: 6.0,
            if_noise_figure_db: 2.0,
            bandwidth: 2e9,
            room_temperature: 300.0,
        }
    }
}

impl SrParams {
    /// Ideal chain: lossless, noiseless stages.
    pub fn ideal(rf_gain: f64) -> Self {
        Self {
            rf_gain,
            rf_noise_figure_db: 0.0,
            line_loss_db: 0.0,
            mixer_loss_db: 0.0,
            mixer_noise_figure_db: 0.0,
            if_noise_figure_db: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rf_gain >= 1.0) {
            return domain(format!("RF gain must be >= 1 (linear), got {}", self.rf_gain));
        }
        for (name, v) in [
            ("line loss", self.line_loss_db),
            ("mixer loss", self.mixer_loss_db),
            ("RF noise figure", self.rf_noise_figure_db),
            ("mixer noise figure", self.mixer_noise_figure_db),
            ("IF noise figure", self.if_noise_figure_db),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return domain(format!("{name} must be >= 0 dB, got {v}"));
            }
        }
        if !(self.bandwidth > 0.0) {
            return domain("receiver bandwidth must be positive");
        }
        if !(self.room_temperature > 0.0) {
            return domain("ambient temperature must be positive");
        }
        Ok(())
    }
}
