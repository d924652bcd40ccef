use super::adam::{Adam, AdamConfig};
use super::model::{BatchStats, Model};
use crate::datasets::EnvelopeSignal;
use crate::error::Result;
use crate::scalar::Scalar;

/// Everything needed to resume or reproduce training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState<T = f64> {
    pub model: Model<T>,
    pub optimizer: Adam<T>,
    pub epoch: u64,
    pub seed: u64,
}

impl<T: Scalar> TrainState<T> {
    pub fn new(model: Model<T>, config: AdamConfig, seed: u64) -> Self {
        let optimizer = Adam::new(config, model.params());
        Self { model, optimizer, epoch: 0, seed }
    }

    /// One optimizer step on the mean loss of `batch`. `readouts` may supply
    /// cached front-end features for front ends without trainable state.
    pub fn step(
        &mut self,
        batch: &[&EnvelopeSignal<T>],
        readouts: Option<&[&[T]]>,
        lr: f64,
    ) -> Result<BatchStats<T>> {
        let (mut grads, stats) = self.model.batch_grads(batch, readouts)?;
        self.model.finish_grads(&mut grads)?;
        self.optimizer.update(self.model.params_mut(), &grads.values, lr)?;
        Ok(stats)
    }
}
