use rand::seq::SliceRandom;

use crate::error::{domain, Error, Result};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Deterministic shuffle of `0..n` cut into disjoint train / held-out parts.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return domain(format!("train fraction must lie in (0,1), got {train_fraction}"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream(seed, Purpose::Split, &[n as u64]));
    let cut = (train_fraction * n as f64).round() as usize;
    let test = idx.split_off(cut);
    if idx.is_empty() || test.is_empty() {
        return Err(Error::EmptySplit(format!(
            "{n} records at fraction {train_fraction} leave an empty side"
        )));
    }
    Ok(Split { train: idx, test })
}

/// Minibatches of `indices` for one epoch, shuffled by `(seed, epoch)`.
/// The last batch may be short.
pub fn epoch_batches(indices: &[usize], batch: usize, seed: u64, epoch: usize) -> Vec<Vec<usize>> {
    let mut order = indices.to_vec();
    order.shuffle(&mut stream(seed, Purpose::Shuffle, &[epoch as u64]));
    order.chunks(batch.max(1)).map(<[usize]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighty_twenty() {
        let s = split_indices(100, 0.8, 3).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (80, 20));
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn batches_are_reproducible() {
        let idx: Vec<usize> = (0..50).collect();
        assert_eq!(epoch_batches(&idx, 8, 1, 4), epoch_batches(&idx, 8, 1, 4));
        assert_ne!(epoch_batches(&idx, 8, 1, 4), epoch_batches(&idx, 8, 1, 5));
    }

    #[test]
    fn oversized_batch() {
        let idx: Vec<usize> = (0..5).collect();
        let b = epoch_batches(&idx, 64, 0, 0);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].len(), 5);
    }

    #[test]
    fn bad_fractions() {
        assert!(split_indices(10, 0.0, 0).is_err());
        assert!(split_indices(10, 1.0, 0).is_err());
        assert!(matches!(split_indices(1, 0.5, 0), Err(Error::EmptySplit(_))));
    }
}
