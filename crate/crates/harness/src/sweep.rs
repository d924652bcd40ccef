//! Accuracy versus RF power with repeated noise trials on a frozen network.

use std::path::{Path, PathBuf};

use mirp_core::datasets::EnvelopeSignal;
use mirp_core::nn::{Model, TrainState};
use mirp_core::physics::{
    add_measurement_noise, homodyne_shot_noise, resonator_derive, snr_conventional, snr_mirp, Detector,
};
use mirp_core::rng::noise_stream;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ClearanceSource, ExperimentConfig, Mode, Task};
use crate::error::{HarnessError, IoContext, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub run_id: String,
    pub mode: Mode,
    pub task: Task,
    pub k: usize,
    pub gamma_over_2pi_hz: f64,
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub test_records: usize,
    pub noise: bool,
    pub noiseless_accuracy: f64,
    pub powers_watt: Vec<f64>,
    pub trials: usize,
    /// `accuracy[power][trial]`.
    pub accuracy: Vec<Vec<f64>>,
}

impl SweepResult {
    pub fn mean(&self, power: usize) -> f64 {
        let a = &self.accuracy[power];
        a.iter().sum::<f64>() / a.len() as f64
    }

    /// Sample standard deviation over trials; zero for a single trial.
    pub fn std(&self, power: usize) -> f64 {
        let a = &self.accuracy[power];
        if a.len() < 2 {
            return 0.0;
        }
        let m = self.mean(power);
        (a.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (a.len() - 1) as f64).sqrt()
    }

    /// Index of the grid point closest to `watt` on a log scale.
    pub fn nearest_power(&self, watt: f64) -> Option<usize> {
        (0..self.powers_watt.len()).min_by(|&a, &b| {
            let da = (self.powers_watt[a] / watt).ln().abs();
            let db = (self.powers_watt[b] / watt).ln().abs();
            da.total_cmp(&db)
        })
    }
}

/// Measurement detector of `mode` under `cfg`.
pub fn detector(cfg: &ExperimentConfig, mode: Mode) -> Detector {
    match mode {
        Mode::Conventional => Detector::Receiver,
        Mode::Mirp | Mode::Untrained => Detector::Homodyne {
            clearance_db: match cfg.homodyne.clearance {
                ClearanceSource::Quoted => cfg.homodyne.quoted_clearance_db,
                ClearanceSource::Computed => homodyne_shot_noise(&cfg.homodyne.params()).clearance_db,
            },
        },
    }
}

/// Per-readout SNR scale of `mode` at RF power `p_rf`.
pub fn snr_scale(cfg: &ExperimentConfig, mode: Mode, p_rf: f64) -> Result<f64> {
    Ok(match mode {
        Mode::Conventional => snr_conventional(p_rf, &cfg.receiver.params()),
        Mode::Mirp | Mode::Untrained => {
            let res = resonator_derive(&cfg.rf_chain.params())?;
            let ring = cfg.ring.params();
            snr_mirp(p_rf, ring.beta, res.transmissivity, ring.bin_spacing, res.carrier)
        }
    })
}

/// Linewidth Γ/2π implied by a model's decay factor.
pub fn model_linewidth_hz(model: &Model<f64>, bin_spacing: f64) -> f64 {
    -2.0 * model.decay().ln() / bin_spacing / std::f64::consts::TAU
}

/// Evaluates `state` on `test` at every configured power and trial. Noise
/// for record `r`, power `p`, trial `t` comes from its own counter-based
/// stream, so results do not depend on scheduling.
pub fn power_sweep(state: &TrainState<f64>, cfg: &ExperimentConfig, test: &[EnvelopeSignal<f64>]) -> Result<SweepResult> {
    let model = &state.model;
    let mode = Mode::from_front_end(model.spec().front_end);
    let readouts = model.readouts(test)?;
    let predict_all = |noisy: &dyn Fn(usize, &mut Vec<f64>) -> Result<()>| -> Result<f64> {
        let mut correct = 0;
        for (r, (clean, x)) in readouts.iter().zip(test).enumerate() {
            let mut f = clean.clone();
            noisy(r, &mut f)?;
            correct += (model.predict_readout(&f)? == x.label) as usize;
        }
        Ok(correct as f64 / test.len().max(1) as f64)
    };
    let noiseless_accuracy = predict_all(&|_, _| Ok(()))?;

    let powers = &cfg.sweep.powers_watt;
    let trials = cfg.sweep.trials;
    let det = detector(cfg, mode);
    let seed = cfg.experiment.seed;
    let cells: Vec<(usize, usize)> = (0..powers.len()).flat_map(|p| (0..trials).map(move |t| (p, t))).collect();
    let flat = cells
        .par_iter()
        .map(|&(p, t)| {
            if !cfg.sweep.noise {
                return Ok(noiseless_accuracy);
            }
            let snr = snr_scale(cfg, mode, powers[p])?;
            predict_all(&|r, f| {
                add_measurement_noise(f, snr, det, &mut noise_stream(seed, r, p, t))?;
                Ok(())
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let accuracy = flat.chunks(trials).map(<[f64]>::to_vec).collect();

    let config_hash = hex::encode(cfg.config_hash());
    Ok(SweepResult {
        run_id: format!("{}-{}", &config_hash[..12], mode.name()),
        mode,
        task: cfg.experiment.task,
        k: cfg.stride(),
        gamma_over_2pi_hz: model_linewidth_hz(model, cfg.ring.bin_spacing),
        config_hash,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        test_records: test.len(),
        noise: cfg.sweep.noise,
        noiseless_accuracy,
        powers_watt: powers.clone(),
        trials,
        accuracy,
    })
}

pub fn sweep_path(out: &Path, mode: Mode) -> PathBuf {
    out.join(format!("{}.sweep.json", mode.name()))
}

/// Writes the result as JSON plus a sidecar holding the wall-clock time, so
/// the result file itself is byte-reproducible.
pub fn save_sweep(out: &Path, result: &SweepResult) -> Result<PathBuf> {
    std::fs::create_dir_all(out).context(|| format!("creating {}", out.display()))?;
    let path = sweep_path(out, result.mode);
    let json = serde_json::to_string_pretty(result).map_err(|e| HarnessError::Format(e.to_string()))?;
    std::fs::write(&path, json + "\n").context(|| format!("writing {}", path.display()))?;
    write_timestamp(&path)?;
    Ok(path)
}

pub fn load_sweep(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Format(format!("{}: {e}", path.display())))
}

pub(crate) fn write_timestamp(path: &Path) -> Result<()> {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let side = PathBuf::from(format!("{}.timestamp", path.display()));
    std::fs::write(&side, format!("{secs}\n")).context(|| format!("writing {}", side.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Task;
    use crate::data::load_task;
    use crate::train::run_training;

    fn trained(mode: Mode) -> (ExperimentConfig, TrainState<f64>, Vec<EnvelopeSignal<f64>>) {
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.task = Task::Rfmod;
        cfg.experiment.stride = 16;
        cfg.data.train_records = 32;
        cfg.data.validation_records = 0;
        cfg.data.test_records = 24;
        cfg.data.rfmod_len = 256;
        cfg.model.scale = 16;
        cfg.ring.modes = 4;
        cfg.optim.epochs = 2;
        cfg.optim.batch = 16;
        cfg.sweep.powers_watt = vec![1e-18, 1e-12, 1e-6];
        cfg.sweep.trials = 3;
        let data = load_task(&cfg).unwrap();
        let out = run_training(&cfg, &data, mode).unwrap();
        (cfg, out.state, data.test.records)
    }

    #[test]
    fn noise_off_is_flat_and_trials_reproduce() {
        let (mut cfg, state, test) = trained(Mode::Mirp);
        let a = power_sweep(&state, &cfg, &test).unwrap();
        assert_eq!(a, power_sweep(&state, &cfg, &test).unwrap());
        assert_eq!(a.accuracy.len(), 3);
        assert!(a.accuracy.iter().all(|row| row.len() == 3));
        assert!(a.accuracy.iter().flatten().all(|&x| (0.0..=1.0).contains(&x)));
        // 1 µW is far above the noise floor
        assert!((a.mean(2) - a.noiseless_accuracy).abs() < 0.05);
        assert!((a.gamma_over_2pi_hz - cfg.ring.linewidth_hz).abs() / cfg.ring.linewidth_hz < 1e-9);

        cfg.sweep.noise = false;
        let flat = power_sweep(&state, &cfg, &test).unwrap();
        assert!(flat.accuracy.iter().flatten().all(|&x| x == flat.noiseless_accuracy));
        assert!((0..3).all(|p| flat.std(p) == 0.0));
    }

    #[test]
    fn one_trial_has_zero_std() {
        let (mut cfg, state, test) = trained(Mode::Conventional);
        cfg.sweep.trials = 1;
        let r = power_sweep(&state, &cfg, &test).unwrap();
        assert!((0..3).all(|p| r.std(p) == 0.0));
        assert_eq!(r.nearest_power(1.3e-12), Some(1));
    }

    #[test]
    fn sample_std() {
        let mut r = SweepResult {
            run_id: String::new(),
            mode: Mode::Mirp,
            task: Task::Mnist,
            k: 1,
            gamma_over_2pi_hz: 0.0,
            config_hash: String::new(),
            code_version: String::new(),
            seed: 0,
            test_records: 4,
            noise: true,
            noiseless_accuracy: 1.0,
            powers_watt: vec![1.0],
            trials: 4,
            accuracy: vec![vec![0.5, 0.75, 0.25, 0.5]],
        };
        assert_eq!(r.mean(0), 0.5);
        assert!((r.std(0) - (0.125f64 / 3.0).sqrt()).abs() < 1e-15);
        r.accuracy[0] = vec![0.3];
        assert_eq!(r.std(0), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let (cfg, state, test) = trained(Mode::Untrained);
        let r = power_sweep(&state, &cfg, &test).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = save_sweep(dir.path(), &r).unwrap();
        assert_eq!(load_sweep(&p).unwrap(), r);
        assert!(dir.path().join("untrained.sweep.json.timestamp").is_file());
    }
}
