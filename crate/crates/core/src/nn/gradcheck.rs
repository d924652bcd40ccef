//! Central finite-difference verification of the analytic gradients.

use rand::seq::index::sample;

use super::model::{Grads, Model};
use crate::datasets::EnvelopeSignal;
use crate::error::Result;
use crate::rng::{stream, Purpose};

pub const FD_STEP: f64 = 1e-6;

/// Gradient entries below this magnitude are compared in absolute terms.
/// Central differences of a loss of order one carry a rounding error near
/// `1e-16 / FD_STEP`, so smaller gradients cannot be resolved relatively.
pub const REL_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub checked: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub params: Vec<ParamCheck>,
    /// Coordinates dropped because the perturbation crossed a ReLU or
    /// pooling kink.
    pub skipped: usize,
    pub max_rel_error: f64,
    pub worst: Option<(String, usize)>,
}

impl GradCheckReport {
    pub fn checked(&self) -> usize {
        self.params.iter().map(|p| p.checked).sum()
    }

    pub fn pass(&self) -> bool {
        self.checked() > 0 && self.max_rel_error < self.tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Checks the model's own backward pass on one record.
pub fn grad_check(
    model: &Model<f64>,
    record: &EnvelopeSignal<f64>,
    coords_per_param: usize,
    tolerance: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    let (analytic, _) = model.gradient(&[record])?;
    grad_check_against(model, record, &analytic, coords_per_param, tolerance, seed)
}

/// Compares a supplied gradient against central differences of the loss on
/// `record`. Up to `coords_per_param` random entries of every tensor are
/// probed.
pub fn grad_check_against(
    model: &Model<f64>,
    record: &EnvelopeSignal<f64>,
    analytic: &Grads<f64>,
    coords_per_param: usize,
    tolerance: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    let mut probe = model.clone();
    let (_, base) = probe.loss_and_pattern(record)?;
    let mut report = GradCheckReport {
        tolerance,
        params: Vec::new(),
        skipped: 0,
        max_rel_error: 0.0,
        worst: None,
    };
    for p in 0..probe.params().len() {
        let len = probe.params()[p].tensor.len();
        let name = probe.params()[p].name.clone();
        let mut rng = stream(seed, Purpose::Check, &[p as u64]);
        let order = sample(&mut rng, len, len.min(coords_per_param.saturating_mul(2)).max(1));
        let mut check = ParamCheck { name: name.clone(), checked: 0, max_rel_error: 0.0 };
        for i in order.iter() {
            if check.checked >= coords_per_param {
                break;
            }
            let orig = probe.params()[p].tensor.data()[i];
            probe.params_mut()[p].tensor.data_mut()[i] = orig + FD_STEP;
            let (up, pu) = probe.loss_and_pattern(record)?;
            probe.params_mut()[p].tensor.data_mut()[i] = orig - FD_STEP;
            let (down, pd) = probe.loss_and_pattern(record)?;
            probe.params_mut()[p].tensor.data_mut()[i] = orig;
            if pu != base || pd != base {
                report.skipped += 1;
                continue;
            }
            let numeric = (up - down) / (2.0 * FD_STEP);
            let err = relative_error(analytic.values[p][i], numeric);
            check.checked += 1;
            check.max_rel_error = check.max_rel_error.max(err);
            if err > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(err);
                report.worst = Some((name.clone(), i));
            }
        }
        report.params.push(check);
    }
    Ok(report)
}
