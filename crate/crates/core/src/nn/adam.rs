use super::model::Param;
use crate::error::{shape, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Bias-corrected Adam with one moment pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T = f64> {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig, params: &[Param<T>]) -> Self {
        let zeros = || params.iter().map(|p| vec![T::zero(); p.tensor.len()]).collect();
        Self { config, step: 0, m: zeros(), v: zeros() }
    }

    /// Applies one update with learning rate `lr`. Nothing is modified when any
    /// gradient entry is non-finite.
    pub fn update(&mut self, params: &mut [Param<T>], grads: &[Vec<T>], lr: f64) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.m.len() {
            return shape("optimizer state does not match the parameter list");
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            if g.len() != p.tensor.len() || m.len() != g.len() {
                return shape(format!("gradient for '{}' has the wrong length", p.name));
            }
            if let Some((index, value)) = g.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFiniteGradient {
                    param: p.name.clone(),
                    index,
                    value: value.as_f64(),
                });
            }
        }
        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
        let (one_b1, one_b2) = (T::lit(1.0 - c.beta1), T::lit(1.0 - c.beta2));
        let (ib1, ib2) = (T::lit(1.0 / bc1), T::lit(1.0 / bc2));
        let (lr, eps) = (T::lit(lr), T::lit(c.eps));
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for (((w, &gi), mi), vi) in p.tensor.data_mut().iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = b1 * *mi + one_b1 * gi;
                *vi = b2 * *vi + one_b2 * gi * gi;
                let mhat = *mi * ib1;
                let vhat = *vi * ib2;
                *w -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Cosine decay from `lr` to zero over `total` steps.
pub fn cosine_lr(lr: f64, step: u64, total: u64) -> f64 {
    if total == 0 {
        return lr;
    }
    let frac = (step.min(total) as f64) / total as f64;
    0.5 * lr * (1.0 + (std::f64::consts::PI * frac).cos())
}
