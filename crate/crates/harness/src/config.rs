//! Experiment configuration: a TOML file with one table per block. Rates and
//! optical frequencies are given in hertz (`Γ/2π`, `g/2π`, `ω/2π`).

use std::path::Path;

use mirp_core::constants::TWO_PI;
use mirp_core::nn::{AdamConfig, FrontEnd, ModelSpec};
use mirp_core::physics::{CarrierConvention, Decimation, HomodyneParams, RfChainParams, RingParams, SrParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Mnist,
    Rfmod,
    Har,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Mnist => "mnist",
            Task::Rfmod => "rfmod",
            Task::Har => "har",
        }
    }

    /// Sub-Nyquist readout stride used for the task at desk scale.
    pub fn default_stride(self) -> usize {
        match self {
            Task::Mnist => 49,
            Task::Rfmod => 64,
            Task::Har => 51,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Mirp,
    Untrained,
    Conventional,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Mirp, Mode::Untrained, Mode::Conventional];

    pub fn front_end(self) -> FrontEnd {
        match self {
            Mode::Mirp => FrontEnd::Mirp,
            Mode::Untrained => FrontEnd::Untrained,
            Mode::Conventional => FrontEnd::Conventional,
        }
    }

    pub fn name(self) -> &'static str {
        self.front_end().name()
    }

    pub fn from_front_end(fe: FrontEnd) -> Mode {
        match fe {
            FrontEnd::Mirp => Mode::Mirp,
            FrontEnd::Untrained => Mode::Untrained,
            FrontEnd::Conventional => Mode::Conventional,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub task: Task,
    pub mode: Mode,
    pub seed: u64,
    /// Readout stride k; 0 selects the task default.
    pub stride: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { task: Task::Mnist, mode: Mode::Mirp, seed: 1, stride: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// Dataset directory; empty uses `$MIRP_DATA_DIR` or `./data`.
    pub dir: String,
    pub train_records: usize,
    /// Held out from the training pool for early stopping and Γ search.
    pub validation_records: usize,
    pub test_records: usize,
    pub rfmod_source: RfmodSource,
    pub rfmod_len: usize,
    pub rfmod_snr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RfmodSource {
    /// Generated LSB / Morse / RTTY / USB frames.
    Synthetic,
    /// `rfmod/train.iq` and `rfmod/test.iq` under the data directory.
    Iq,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            dir: String::new(),
            train_records: 8000,
            validation_records: 1000,
            test_records: 2000,
            rfmod_source: RfmodSource::Synthetic,
            rfmod_len: 2048,
            rfmod_snr_db: 25.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Hertz,
    Angular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RfChainSection {
    pub capacitance: f64,
    pub inductance: f64,
    pub resistance: f64,
    pub z_air: f64,
    pub carrier: Carrier,
}

impl Default for RfChainSection {
    fn default() -> Self {
        let p = RfChainParams::default();
        Self {
            capacitance: p.capacitance,
            inductance: p.inductance,
            resistance: p.resistance,
            z_air: p.z_air,
            carrier: Carrier::Hertz,
        }
    }
}

impl RfChainSection {
    pub fn params(&self) -> RfChainParams {
        RfChainParams {
            capacitance: self.capacitance,
            inductance: self.inductance,
            resistance: self.resistance,
            z_air: self.z_air,
            carrier: match self.carrier {
                Carrier::Hertz => CarrierConvention::Hertz,
                Carrier::Angular => CarrierConvention::Angular,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RingSection {
    pub linewidth_hz: f64,
    pub coupling_hz: f64,
    pub beta: f64,
    pub thermal_occupation: f64,
    pub bin_spacing: f64,
    pub pulse_width: f64,
    pub modes: usize,
    pub base_frequency_hz: f64,
    pub mode_spacing_hz: f64,
    pub pump_power: f64,
    /// Pump photon number per mode `|W_rms|²` quoted for the validity checks.
    pub pump_photons_per_mode: f64,
}

impl Default for RingSection {
    fn default() -> Self {
        let r = RingParams::default();
        Self {
            linewidth_hz: r.linewidth / TWO_PI,
            coupling_hz: r.coupling / TWO_PI,
            beta: r.beta,
            thermal_occupation: r.thermal_occupation,
            bin_spacing: r.bin_spacing,
            pulse_width: r.pulse_width,
            modes: r.modes,
            base_frequency_hz: r.base_frequency / TWO_PI,
            mode_spacing_hz: r.mode_spacing / TWO_PI,
            pump_power: r.pump_power,
            pump_photons_per_mode: 3.9e4,
        }
    }
}

impl RingSection {
    pub fn params(&self) -> RingParams {
        RingParams {
            linewidth: TWO_PI * self.linewidth_hz,
            coupling: TWO_PI * self.coupling_hz,
            beta: self.beta,
            thermal_occupation: self.thermal_occupation,
            bin_spacing: self.bin_spacing,
            pulse_width: self.pulse_width,
            modes: self.modes,
            base_frequency: TWO_PI * self.base_frequency_hz,
            mode_spacing: TWO_PI * self.mode_spacing_hz,
            pump_power: self.pump_power,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClearanceSource {
    /// The clearance stated with the detector parameters.
    Quoted,
    /// Evaluated from the LO shot noise and electronic noise.
    Computed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomodyneSection {
    pub lo_power: f64,
    pub electronic_noise_power: f64,
    pub impedance: f64,
    pub transimpedance_gain: f64,
    pub quantum_efficiency: f64,
    pub bandwidth: f64,
    pub lo_frequency_hz: f64,
    pub clearance: ClearanceSource,
    pub quoted_clearance_db: f64,
}

impl Default for HomodyneSection {
    fn default() -> Self {
        let h = HomodyneParams::default();
        Self {
            lo_power: h.lo_power,
            electronic_noise_power: h.electronic_noise_power,
            impedance: h.impedance,
            transimpedance_gain: h.transimpedance_gain,
            quantum_efficiency: h.quantum_efficiency,
            bandwidth: h.bandwidth,
            lo_frequency_hz: h.lo_frequency / TWO_PI,
            clearance: ClearanceSource::Quoted,
            quoted_clearance_db: 45.0,
        }
    }
}

impl HomodyneSection {
    pub fn params(&self) -> HomodyneParams {
        HomodyneParams {
            lo_power: self.lo_power,
            electronic_noise_power: self.electronic_noise_power,
            impedance: self.impedance,
            transimpedance_gain: self.transimpedance_gain,
            quantum_efficiency: self.quantum_efficiency,
            bandwidth: self.bandwidth,
            lo_frequency: TWO_PI * self.lo_frequency_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecimationMode {
    Pick,
    Boxcar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverSection {
    pub rf_gain: f64,
    pub rf_noise_figure_db: f64,
    pub line_loss_db: f64,
    pub mixer_loss_db: f64,
    pub mixer_noise_figure_db: f64,
    pub if_noise_figure_db: f64,
    pub bandwidth: f64,
    pub room_temperature: f64,
    pub decimation: DecimationMode,
}

impl Default for ReceiverSection {
    fn default() -> Self {
        let s = SrParams::default();
        Self {
            rf_gain: s.rf_gain,
            rf_noise_figure_db: s.rf_noise_figure_db,
            line_loss_db: s.line_loss_db,
            mixer_loss_db: s.mixer_loss_db,
            mixer_noise_figure_db: s.mixer_noise_figure_db,
            if_noise_figure_db: s.if_noise_figure_db,
            bandwidth: s.bandwidth,
            room_temperature: s.room_temperature,
            decimation: DecimationMode::Pick,
        }
    }
}

impl ReceiverSection {
    pub fn params(&self) -> SrParams {
        SrParams {
            rf_gain: self.rf_gain,
            rf_noise_figure_db: self.rf_noise_figure_db,
            line_loss_db: self.line_loss_db,
            mixer_loss_db: self.mixer_loss_db,
            mixer_noise_figure_db: self.mixer_noise_figure_db,
            if_noise_figure_db: self.if_noise_figure_db,
            bandwidth: self.bandwidth,
            room_temperature: self.room_temperature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub scale: usize,
    pub physical_relu: bool,
    pub train_linewidth: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { scale: 4, physical_relu: true, train_linewidth: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Constant,
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimSection {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch: usize,
    pub epochs: usize,
    pub schedule: Schedule,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub patience: usize,
}

impl Default for OptimSection {
    fn default() -> Self {
        let a = AdamConfig::default();
        Self {
            lr: a.lr,
            beta1: a.beta1,
            beta2: a.beta2,
            eps: a.eps,
            batch: 64,
            epochs: 20,
            schedule: Schedule::Constant,
            patience: 5,
        }
    }
}

impl OptimSection {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, beta1: self.beta1, beta2: self.beta2, eps: self.eps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    /// Candidate `Γ/2π` values (Hz).
    pub linewidths_hz: Vec<f64>,
    /// Power at which validation accuracy is compared (W).
    pub reference_power: f64,
    pub trials: usize,
    /// Training epochs per candidate; 0 uses the optimizer setting.
    pub epochs: usize,
}

impl Default for SearchSection {
    fn default() -> Self {
        Self { linewidths_hz: vec![2e7, 2e8, 2e9, 2e10], reference_power: 1e-12, trials: 3, epochs: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub powers_watt: Vec<f64>,
    pub trials: usize,
    /// Disables measurement noise (every power then evaluates identically).
    pub noise: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { powers_watt: (0..13).map(|i| 10f64.powi(i - 18)).collect(), trials: 10, noise: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub data: DataSection,
    pub rf_chain: RfChainSection,
    pub ring: RingSection,
    pub homodyne: HomodyneSection,
    pub receiver: ReceiverSection,
    pub model: ModelSection,
    pub optim: OptimSection,
    pub search: SearchSection,
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &[])
    }

    /// Parses `text` after applying `section.key=value` overrides.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_with(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn stride(&self) -> usize {
        if self.experiment.stride == 0 {
            self.experiment.task.default_stride()
        } else {
            self.experiment.stride
        }
    }

    pub fn decay(&self) -> f64 {
        self.ring.params().decay()
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(config_err(msg)) };
        check(self.stride() >= 1, "stride must be >= 1".into())?;
        let p = &self.sweep.powers_watt;
        check(!p.is_empty(), "sweep.powers_watt must not be empty".into())?;
        check(p.iter().all(|&w| w > 0.0 && w.is_finite()), "sweep powers must be positive".into())?;
        check(p.windows(2).all(|w| w[0] < w[1]), "sweep.powers_watt must be strictly increasing".into())?;
        check(self.sweep.trials >= 1, "sweep.trials must be >= 1".into())?;
        check(self.search.trials >= 1, "search.trials must be >= 1".into())?;
        check(!self.search.linewidths_hz.is_empty(), "search.linewidths_hz must not be empty".into())?;
        check(
            self.search.linewidths_hz.iter().all(|&g| g >= 0.0 && g.is_finite()),
            "search linewidths must be finite and >= 0".into(),
        )?;
        check(self.optim.batch >= 1, "optim.batch must be >= 1".into())?;
        check(self.optim.lr > 0.0, "optim.lr must be positive".into())?;
        check(self.data.train_records >= 1, "data.train_records must be >= 1".into())?;
        check(self.data.test_records >= 1, "data.test_records must be >= 1".into())?;
        self.rf_chain.params().validate().map_err(|e| config_err(e.to_string()))?;
        self.ring.params().validate().map_err(|e| config_err(e.to_string()))?;
        self.homodyne.params().validate().map_err(|e| config_err(e.to_string()))?;
        self.receiver.params().validate().map_err(|e| config_err(e.to_string()))?;
        Ok(())
    }

    /// The model geometry for `mode` on a task with `channels × len` records.
    pub fn model_spec(&self, mode: Mode, channels: usize, len: usize, classes: usize) -> ModelSpec {
        ModelSpec {
            front_end: mode.front_end(),
            channels,
            len,
            stride: self.stride(),
            modes: self.ring.modes,
            classes,
            scale: self.model.scale,
            physical_relu: self.model.physical_relu,
            train_linewidth: self.model.train_linewidth && mode != Mode::Conventional,
            decimation: match self.receiver.decimation {
                DecimationMode::Pick => Decimation::Pick,
                DecimationMode::Boxcar => Decimation::Boxcar,
            },
        }
    }

    /// SHA-256 of the canonical JSON form (keys sorted), independent of the
    /// key order in the source file.
    pub fn config_hash(&self) -> [u8; 32] {
        digest(&serde_json::to_value(self).expect("config serializes"))
    }

    /// Hash of everything that shapes a trained model, i.e. the config
    /// without the search and sweep blocks.
    pub fn model_hash(&self) -> [u8; 32] {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("search");
            obj.remove("sweep");
        }
        digest(&v)
    }
}

fn digest(v: &serde_json::Value) -> [u8; 32] {
    let text = serde_json::to_string(v).expect("json value serializes");
    Sha256::digest(text.as_bytes()).into()
}

/// Applies `section.key=value`. The value is read as a TOML literal, falling
/// back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{assignment}` is not of the form section.key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| config_err(format!("override key `{}` needs a section prefix", path.trim())))?;
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(HarnessError::Config(format!("`{section}` is not a table"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.stride(), 49);
        assert_eq!(cfg.sweep.powers_watt.len(), 13);
        assert!((cfg.sweep.powers_watt[0] - 1e-18).abs() < 1e-30);
        assert!((cfg.decay() - (-std::f64::consts::PI).exp()).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("[ring]\nlinewdith_hz = 1e9\n").is_err());
        assert!(ExperimentConfig::from_toml("[bogus]\n").is_err());
        assert!(ExperimentConfig::from_toml("[experiment]\nmode = \"psychic\"\n").is_err());
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = ExperimentConfig::from_toml("[ring]\nbeta = 0.02\nmodes = 8\n[experiment]\nseed = 4\n").unwrap();
        let b = ExperimentConfig::from_toml("[experiment]\nseed = 4\n[ring]\nmodes = 8\nbeta = 0.02\n").unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn hash_tracks_physics_changes() {
        let base = ExperimentConfig::default();
        let h = base.config_hash();
        let mut c = base.clone();
        c.ring.beta *= 1.0 + 1e-12;
        assert_ne!(c.config_hash(), h);
        let mut c = base.clone();
        c.receiver.line_loss_db = 1.6;
        assert_ne!(c.config_hash(), h);
        assert_ne!(c.model_hash(), base.model_hash());
        let mut c = base.clone();
        c.sweep.trials = 3;
        assert_ne!(c.config_hash(), h);
        assert_eq!(c.model_hash(), base.model_hash());
    }

    #[test]
    fn overrides() {
        let cfg = ExperimentConfig::from_toml_with(
            "",
            &[
                "experiment.mode=conventional".into(),
                "ring.linewidth_hz = 2e8".into(),
                "sweep.powers_watt=[1e-12, 1e-6]".into(),
                "experiment.task=rfmod".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.experiment.mode, Mode::Conventional);
        assert_eq!(cfg.ring.linewidth_hz, 2e8);
        assert_eq!(cfg.sweep.powers_watt, vec![1e-12, 1e-6]);
        assert_eq!(cfg.stride(), 64);
        assert!(ExperimentConfig::from_toml_with("", &["ring.nope=1".into()]).is_err());
        assert!(ExperimentConfig::from_toml_with("", &["noequals".into()]).is_err());
        assert!(ExperimentConfig::from_toml_with("", &["nosection=1".into()]).is_err());
    }

    #[test]
    fn invariants_enforced() {
        assert!(ExperimentConfig::from_toml("[sweep]\npowers_watt = [1e-6, 1e-12]\n").is_err());
        assert!(ExperimentConfig::from_toml("[sweep]\npowers_watt = []\n").is_err());
        assert!(ExperimentConfig::from_toml("[sweep]\ntrials = 0\n").is_err());
        assert!(ExperimentConfig::from_toml("[ring]\nbeta = 1.5\n").is_err());
    }
}
