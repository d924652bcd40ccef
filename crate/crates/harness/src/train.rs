//! Noiseless training of one sensing mode, with checkpoints and curves.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mirp_core::datasets::{epoch_batches, EnvelopeSignal};
use mirp_core::nn::{cosine_lr, read_checkpoint, write_checkpoint, Model, Param, TrainState};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Mode, Schedule};
use crate::data::TaskData;
use crate::error::{HarnessError, IoContext, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub mode: Mode,
    pub state: TrainState<f64>,
    pub curve: Vec<EpochRecord>,
    /// Noiseless accuracy on the test split.
    pub test_accuracy: f64,
    pub stopped_early: bool,
}

/// Fraction of `records` classified correctly from noiseless readouts.
pub fn accuracy(model: &Model<f64>, records: &[EnvelopeSignal<f64>]) -> Result<f64> {
    if records.is_empty() {
        return Ok(0.0);
    }
    let readouts = model.readouts(records)?;
    let correct = readouts
        .par_iter()
        .zip(records)
        .map(|(r, x)| Ok((model.predict_readout(r)? == x.label) as usize))
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(correct as f64 / records.len() as f64)
}

/// Trains `mode` on the task's training split without measurement noise.
/// With a validation split the parameters of the best validation epoch are
/// kept; `optim.patience` stops early on a plateau.
pub fn run_training(cfg: &ExperimentConfig, data: &TaskData, mode: Mode) -> Result<TrainOutcome> {
    let spec = cfg.model_spec(mode, data.channels(), data.len(), data.classes());
    let seed = cfg.experiment.seed;
    let model = Model::new(spec, cfg.decay(), seed)?;
    let mut state = TrainState::new(model, cfg.optim.adam(), seed);
    let train = &data.train.records;
    let fixed_front = mode == Mode::Conventional || (mode == Mode::Untrained && !state.model.spec().train_linewidth);
    let cached = if fixed_front { Some(state.model.readouts(train)?) } else { None };

    let o = &cfg.optim;
    let indices: Vec<usize> = (0..train.len()).collect();
    let steps_per_epoch = train.len().div_ceil(o.batch);
    let total_steps = (steps_per_epoch * o.epochs) as u64;
    let mut curve = Vec::with_capacity(o.epochs);
    let mut best: Option<(f64, Vec<Param<f64>>)> = None;
    let mut since_best = 0;
    let mut stopped_early = false;
    let mut step = 0u64;

    for epoch in 0..o.epochs {
        let (mut loss_sum, mut correct, mut lr) = (0.0, 0usize, o.lr);
        for batch in epoch_batches(&indices, o.batch, seed, epoch) {
            lr = match o.schedule {
                Schedule::Constant => o.lr,
                Schedule::Cosine => cosine_lr(o.lr, step, total_steps),
            };
            let records: Vec<&EnvelopeSignal<f64>> = batch.iter().map(|&i| &train[i]).collect();
            let readouts: Option<Vec<&[f64]>> =
                cached.as_ref().map(|c| batch.iter().map(|&i| c[i].as_slice()).collect());
            let stats = state.step(&records, readouts.as_deref(), lr).map_err(|e| HarnessError::Diverged {
                epoch,
                detail: e.to_string(),
            })?;
            if !stats.loss_sum.is_finite() {
                return Err(HarnessError::Diverged { epoch, detail: format!("batch loss {}", stats.loss_sum) });
            }
            loss_sum += stats.loss_sum;
            correct += stats.correct;
            step += 1;
        }
        state.epoch = epoch as u64 + 1;
        let validation_accuracy = match &data.validation {
            Some(v) => Some(accuracy(&state.model, &v.records)?),
            None => None,
        };
        let rec = EpochRecord {
            epoch: epoch + 1,
            lr,
            train_loss: loss_sum / train.len() as f64,
            train_accuracy: correct as f64 / train.len() as f64,
            validation_accuracy,
        };
        log::info!(
            "{} epoch {}: loss {:.4} train {:.4} val {:?}",
            mode.name(),
            rec.epoch,
            rec.train_loss,
            rec.train_accuracy,
            rec.validation_accuracy
        );
        curve.push(rec);
        if let Some(v) = validation_accuracy {
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, state.model.params().to_vec()));
                since_best = 0;
            } else {
                since_best += 1;
                if o.patience > 0 && since_best >= o.patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }
    if let Some((_, params)) = best {
        state.model.params_mut().clone_from_slice(&params);
    }
    let test_accuracy = accuracy(&state.model, &data.test.records)?;
    Ok(TrainOutcome { mode, state, curve, test_accuracy, stopped_early })
}

pub fn checkpoint_path(out: &Path, mode: Mode) -> PathBuf {
    out.join(format!("{}.ckpt", mode.name()))
}

pub fn curve_path(out: &Path, mode: Mode) -> PathBuf {
    out.join(format!("{}.curve.csv", mode.name()))
}

pub fn curve_csv(curve: &[EpochRecord]) -> String {
    let mut s = String::from("epoch,lr,train_loss,train_accuracy,validation_accuracy\n");
    for r in curve {
        let val = r.validation_accuracy.map(|v| v.to_string()).unwrap_or_default();
        writeln!(s, "{},{},{},{},{}", r.epoch, r.lr, r.train_loss, r.train_accuracy, val).expect("string write");
    }
    s
}

/// Writes the checkpoint (tagged with the model hash) and the training curve.
pub fn save_training(out: &Path, cfg: &ExperimentConfig, outcome: &TrainOutcome) -> Result<PathBuf> {
    std::fs::create_dir_all(out).context(|| format!("creating {}", out.display()))?;
    let path = checkpoint_path(out, outcome.mode);
    write_checkpoint(&path, &outcome.state.to_checkpoint(cfg.model_hash()))?;
    let curve = curve_path(out, outcome.mode);
    std::fs::write(&curve, curve_csv(&outcome.curve)).context(|| format!("writing {}", curve.display()))?;
    Ok(path)
}

/// Loads the checkpoint for `mode`, refusing one trained under another config.
pub fn load_training(out: &Path, cfg: &ExperimentConfig, mode: Mode) -> Result<TrainState<f64>> {
    let path = checkpoint_path(out, mode);
    if !path.is_file() {
        return Err(HarnessError::MissingCheckpoint(path.display().to_string()));
    }
    let ck = read_checkpoint(&path)?;
    let expected = cfg.model_hash();
    if ck.config_hash != expected {
        return Err(HarnessError::HashMismatch {
            path: path.display().to_string(),
            found: hex::encode(ck.config_hash),
            expected: hex::encode(expected),
        });
    }
    Ok(TrainState::from_checkpoint(&ck)?)
}
