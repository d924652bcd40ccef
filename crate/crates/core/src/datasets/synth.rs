//! Synthetic four-class RF modulation corpus.
//!
//! Frequencies are in cycles per sample of the Nyquist-rate grid. Each frame
//! is a complex baseband record emitted as I and Q channels, with complex
//! white noise at the requested SNR, then scaled to unit RMS per channel.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, EnvelopeSignal, SplitTag};
use crate::constants::db_to_linear;
use crate::error::{domain, Result};
use crate::rng::{stream, Purpose};

pub const RFMOD_CLASSES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfModClass {
    Lsb = 0,
    Morse = 1,
    Rtty = 2,
    Usb = 3,
}

impl RfModClass {
    pub const ALL: [RfModClass; 4] = [Self::Lsb, Self::Morse, Self::Rtty, Self::Usb];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lsb => "lsb",
            Self::Morse => "morse",
            Self::Rtty => "rtty",
            Self::Usb => "usb",
        }
    }
}

type Iq = (Vec<f64>, Vec<f64>);

/// Voice-like multi-tone content translated to one sideband.
fn sideband(rng: &mut ChaCha8Rng, len: usize, upper: bool) -> Iq {
    let tones = rng.random_range(3..=6);
    let params: Vec<(f64, f64, f64)> = (0..tones)
        .map(|_| (rng.random_range(0.004..0.08), rng.random_range(0.3..1.0), rng.random_range(0.0..TAU)))
        .collect();
    // syllabic envelope, slower than the lowest tone
    let fe = rng.random_range(0.0005..0.002);
    let pe = rng.random_range(0.0..TAU);
    let sign = if upper { 1.0 } else { -1.0 };
    let mut i = vec![0.0; len];
    let mut q = vec![0.0; len];
    for t in 0..len {
        let env = 0.6 + 0.4 * (TAU * fe * t as f64 + pe).sin();
        for &(f, a, p) in &params {
            let ph = TAU * f * t as f64 + p;
            i[t] += env * a * ph.cos();
            q[t] += env * a * sign * ph.sin();
        }
    }
    (i, q)
}

/// On-off keyed carrier with random dit/dah sequences.
fn morse(rng: &mut ChaCha8Rng, len: usize) -> Iq {
    let fc = rng.random_range(0.005..0.02) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    let phase = rng.random_range(0.0..TAU);
    // dit length in samples, standing in for the keying speed
    let unit = rng.random_range(24..=64usize);
    let mut key = Vec::with_capacity(len + 8 * unit);
    key.extend(std::iter::repeat_n(false, rng.random_range(0..3 * unit)));
    while key.len() < len {
        let on = if rng.random::<f64>() < 0.5 { unit } else { 3 * unit };
        key.extend(std::iter::repeat_n(true, on));
        let gap = match rng.random_range(0..10) {
            0..=5 => unit,
            6..=8 => 3 * unit,
            _ => 7 * unit,
        };
        key.extend(std::iter::repeat_n(false, gap));
    }
    let mut i = vec![0.0; len];
    let mut q = vec![0.0; len];
    for t in 0..len {
        if key[t] {
            let ph = TAU * fc * t as f64 + phase;
            i[t] = ph.cos();
            q[t] = ph.sin();
        }
    }
    (i, q)
}

/// Phase-continuous binary FSK with a random shift and symbol length.
fn rtty(rng: &mut ChaCha8Rng, len: usize) -> Iq {
    let shift = if rng.random::<bool>() { 0.01 } else { 0.085 };
    let centre = rng.random_range(-0.01..0.01);
    let symbol = rng.random_range(30..=80usize);
    let mut phase = rng.random_range(0.0..TAU);
    let mut bit = rng.random::<bool>();
    let mut i = vec![0.0; len];
    let mut q = vec![0.0; len];
    for t in 0..len {
        if t % symbol == 0 {
            bit = rng.random();
        }
        let f = centre + if bit { shift / 2.0 } else { -shift / 2.0 };
        i[t] = phase.cos();
        q[t] = phase.sin();
        phase = (phase + TAU * f) % TAU;
    }
    (i, q)
}

fn add_noise(rng: &mut ChaCha8Rng, (i, q): &mut Iq, snr_db: f64) {
    let power = i.iter().zip(q.iter()).map(|(a, b)| a * a + b * b).sum::<f64>() / i.len() as f64;
    let sigma = (power / db_to_linear(snr_db) / 2.0).sqrt();
    for v in i.iter_mut().chain(q.iter_mut()) {
        let e: f64 = StandardNormal.sample(rng);
        *v += sigma * e;
    }
}

/// Generates one frame of class `class`, deterministic in `(seed, index)`.
pub fn synth_frame(seed: u64, class: RfModClass, index: usize, len: usize, snr_db: f64) -> EnvelopeSignal<f64> {
    let mut rng = stream(seed, Purpose::Synth, &[class as u64, index as u64]);
    let mut iq = match class {
        RfModClass::Lsb => sideband(&mut rng, len, false),
        RfModClass::Usb => sideband(&mut rng, len, true),
        RfModClass::Morse => morse(&mut rng, len),
        RfModClass::Rtty => rtty(&mut rng, len),
    };
    add_noise(&mut rng, &mut iq, snr_db);
    let (i, q) = iq;
    let mut rec = EnvelopeSignal::new(2, i.into_iter().chain(q).collect(), class as usize);
    rec.normalize_rms();
    rec
}

/// `n_per_class` frames per class, interleaved by class.
pub fn synth_rfmod(seed: u64, n_per_class: usize, len: usize, snr_db: f64) -> Result<Dataset> {
    if n_per_class == 0 {
        return domain("need at least one record per class");
    }
    let mut records = Vec::with_capacity(n_per_class * RFMOD_CLASSES);
    for n in 0..n_per_class {
        for class in RfModClass::ALL {
            records.push(synth_frame(seed, class, n, len, snr_db));
        }
    }
    Dataset::new(
        2,
        len,
        RFMOD_CLASSES,
        records,
        SplitTag::Train,
        format!("synthetic rfmod seed={seed} per_class={n_per_class} len={len} snr_db={snr_db}"),
    )
}
