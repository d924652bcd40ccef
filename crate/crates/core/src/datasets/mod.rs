//! Task datasets as unit-RMS envelope records.

mod har;
mod iq;
mod mnist;
mod split;
mod synth;

use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{shape, Result};
use crate::scalar::Scalar;

pub use har::{load_har, parse_har, HAR_CLASSES, HAR_LEN};
pub use iq::{load_iq, read_iq_frames, write_iq, IQ_DEFAULT_LEN};
pub use mnist::{
    encode_idx_images, encode_idx_labels, load_mnist, load_mnist_subset, parse_idx_images,
    parse_idx_labels, IdxImages, MNIST_CLASSES, MNIST_LEN,
};
pub use split::{epoch_batches, split_indices, Split};
pub use synth::{synth_rfmod, RfModClass, RFMOD_CLASSES};

/// Environment variable naming the dataset cache directory.
pub const DATA_DIR_ENV: &str = "MIRP_DATA_DIR";

/// `$MIRP_DATA_DIR`, falling back to `./data`.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// One input record: `channels × len` samples stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSignal<T = f64> {
    pub channels: usize,
    pub samples: Vec<T>,
    pub label: usize,
    /// Set when a channel had zero RMS and was left unnormalized.
    pub zero_rms: bool,
}

impl<T: Scalar> EnvelopeSignal<T> {
    pub fn new(channels: usize, samples: Vec<T>, label: usize) -> Self {
        debug_assert!(channels > 0 && samples.len() % channels == 0);
        Self { channels, samples, label, zero_rms: false }
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn channel(&self, j: usize) -> &[T] {
        let m = self.len();
        &self.samples[j * m..(j + 1) * m]
    }

    pub fn channel_rms(&self, j: usize) -> T {
        let xs = self.channel(j);
        (xs.iter().map(|&x| x * x).sum::<T>() / T::lit(xs.len() as f64)).sqrt()
    }

    /// Scales every channel to unit RMS. Zero channels stay zero and flag
    /// the record.
    pub fn normalize_rms(&mut self) {
        let m = self.len();
        for j in 0..self.channels {
            let rms = self.channel_rms(j);
            if rms > T::zero() {
                let inv = rms.recip();
                self.samples[j * m..(j + 1) * m].iter_mut().for_each(|x| *x *= inv);
            } else {
                self.zero_rms = true;
            }
        }
    }

    pub fn cast<U: Scalar>(&self) -> EnvelopeSignal<U> {
        EnvelopeSignal {
            channels: self.channels,
            samples: self.samples.iter().map(|&x| U::lit(x.as_f64())).collect(),
            label: self.label,
            zero_rms: self.zero_rms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Test,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub channels: usize,
    pub len: usize,
    pub classes: usize,
    pub records: Vec<EnvelopeSignal<f64>>,
    pub split: SplitTag,
    /// Source file digests or generator seed.
    pub provenance: String,
}

impl Dataset {
    pub fn new(
        channels: usize,
        len: usize,
        classes: usize,
        records: Vec<EnvelopeSignal<f64>>,
        split: SplitTag,
        provenance: String,
    ) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if r.channels != channels || r.len() != len {
                return shape(format!(
                    "record {i} is {}x{}, dataset is {channels}x{len}",
                    r.channels,
                    r.len()
                ));
            }
            if r.label >= classes {
                return Err(crate::Error::LabelOutOfRange { label: r.label, classes });
            }
        }
        Ok(Self { channels, len, classes, records, split, provenance })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Keeps the first `n` records.
    pub fn truncate(&mut self, n: usize) {
        self.records.truncate(n);
    }

    /// Subset by index, preserving metadata.
    pub fn select(&self, indices: &[usize], split: SplitTag) -> Dataset {
        Dataset {
            channels: self.channels,
            len: self.len,
            classes: self.classes,
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            split,
            provenance: self.provenance.clone(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for r in &self.records {
            counts[r.label] += 1;
        }
        counts
    }

    /// SHA-256 over shapes, labels and sample bits.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.channels as u64).to_le_bytes());
        h.update((self.len as u64).to_le_bytes());
        for r in &self.records {
            h.update((r.label as u64).to_le_bytes());
            for x in &r.samples {
                h.update(x.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

pub(crate) fn file_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_zero_flag() {
        let mut s = EnvelopeSignal::new(2, vec![2.0, 2.0, 2.0, 0.0, 0.0, 0.0], 1);
        s.normalize_rms();
        assert_eq!(s.channel(0), &[1.0, 1.0, 1.0]);
        assert_eq!(s.channel(1), &[0.0, 0.0, 0.0]);
        assert!(s.zero_rms);
    }

    #[test]
    fn dataset_rejects_bad_records() {
        let r = EnvelopeSignal::new(1, vec![1.0; 4], 3);
        assert!(Dataset::new(1, 4, 3, vec![r.clone()], SplitTag::Train, String::new()).is_err());
        assert!(Dataset::new(1, 5, 4, vec![r.clone()], SplitTag::Train, String::new()).is_err());
        assert!(Dataset::new(1, 4, 4, vec![r], SplitTag::Train, String::new()).is_ok());
    }
}
