//! Grid search over the ring linewidth Γ on the validation split.

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Mode};
use crate::data::TaskData;
use crate::error::{config_err, Result};
use crate::sweep::power_sweep;
use crate::train::run_training;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRow {
    pub linewidth_hz: f64,
    /// Mean validation accuracy over the noise trials at the reference power.
    pub accuracy: f64,
    pub noiseless_accuracy: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSearch {
    pub mode: Mode,
    pub reference_power: f64,
    pub best_linewidth_hz: f64,
    pub rows: Vec<SearchRow>,
}

/// Highest accuracy wins; ties go to the smallest Γ.
pub fn select_best(rows: &[SearchRow]) -> Option<f64> {
    rows.iter()
        .min_by(|a, b| b.accuracy.total_cmp(&a.accuracy).then(a.linewidth_hz.total_cmp(&b.linewidth_hz)))
        .map(|r| r.linewidth_hz)
}

/// Trains `mode` once per grid linewidth and scores it on the validation
/// split at `search.reference_power`.
pub fn gamma_search(cfg: &ExperimentConfig, data: &TaskData, mode: Mode) -> Result<GammaSearch> {
    let validation = data
        .validation
        .as_ref()
        .filter(|v| !v.is_empty())
        .ok_or_else(|| config_err("the linewidth search needs data.validation_records > 0"))?;
    if cfg.search.linewidths_hz.is_empty() {
        return Err(config_err("search.linewidths_hz must not be empty"));
    }
    let mut rows = Vec::with_capacity(cfg.search.linewidths_hz.len());
    for &gamma in &cfg.search.linewidths_hz {
        let mut c = cfg.clone();
        c.ring.linewidth_hz = gamma;
        if cfg.search.epochs > 0 {
            c.optim.epochs = cfg.search.epochs;
        }
        c.sweep.powers_watt = vec![cfg.search.reference_power];
        c.sweep.trials = cfg.search.trials;
        // score on validation without letting it pick the epoch
        let train_only = TaskData { validation: None, ..data.clone() };
        let outcome = run_training(&c, &train_only, mode)?;
        let sweep = power_sweep(&outcome.state, &c, &validation.records)?;
        log::info!("{} Γ/2π={gamma:e} Hz: validation {:.4}", mode.name(), sweep.mean(0));
        rows.push(SearchRow {
            linewidth_hz: gamma,
            accuracy: sweep.mean(0),
            noiseless_accuracy: sweep.noiseless_accuracy,
            seed: c.experiment.seed,
        });
    }
    let best_linewidth_hz = select_best(&rows).expect("grid is non-empty");
    Ok(GammaSearch { mode, reference_power: cfg.search.reference_power, best_linewidth_hz, rows })
}
