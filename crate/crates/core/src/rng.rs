//! Counter-based random streams.
//!
//! Every random draw in an experiment belongs to a stream identified by a
//! tuple of indices (record, power, trial, ...). The stream is a ChaCha8
//! keystream keyed by the master seed, with the 64-bit stream id derived from
//! the tuple, so results never depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a tuple of indices into one stream id.
pub fn stream_id(seed: u64, indices: &[u64]) -> u64 {
    indices.iter().fold(mix64(seed), |h, &i| mix64(h ^ mix64(i)))
}

/// Stream purposes, so that e.g. weight init and noise never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Shuffle = 2,
    Noise = 3,
    Synth = 4,
    Split = 5,
    Check = 6,
}

/// Random generator for `(seed, purpose, indices…)`.
pub fn stream(seed: u64, purpose: Purpose, indices: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((purpose as u64) << 56));
    rng.set_stream(stream_id(seed, indices));
    rng
}

/// Noise stream for one record at one power/trial point of a sweep.
pub fn noise_stream(seed: u64, record: usize, power: usize, trial: usize) -> ChaCha8Rng {
    stream(seed, Purpose::Noise, &[record as u64, power as u64, trial as u64])
}
