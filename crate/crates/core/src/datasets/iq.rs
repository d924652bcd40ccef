//! Raw I/Q frames: interleaved little-endian `f32` pairs `I0 Q0 I1 Q1 …`,
//! `len` complex samples per frame, with a `<file>.labels` sidecar holding
//! one integer class per line.

use std::fs;
use std::path::{Path, PathBuf};

use super::{file_digest, Dataset, EnvelopeSignal, SplitTag};
use crate::error::{Error, Result};

pub const IQ_DEFAULT_LEN: usize = 2048;

fn labels_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".labels");
    PathBuf::from(s)
}

/// Splits a raw byte buffer into `(I, Q)` frames.
pub fn read_iq_frames(bytes: &[u8], len: usize) -> Result<Vec<(Vec<f32>, Vec<f32>)>> {
    let frame_bytes = 2 * len * 4;
    if len == 0 || bytes.len() % frame_bytes != 0 {
        return Err(Error::Format(format!(
            "I/Q file of {} bytes is not a whole number of {frame_bytes}-byte frames",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let mut i = Vec::with_capacity(len);
            let mut q = Vec::with_capacity(len);
            for pair in frame.chunks_exact(8) {
                i.push(f32::from_le_bytes([pair[0], pair[1], pair[2], pair[3]]));
                q.push(f32::from_le_bytes([pair[4], pair[5], pair[6], pair[7]]));
            }
            (i, q)
        })
        .collect())
}

/// Loads frames as two-channel records (I then Q), each channel unit RMS.
pub fn load_iq(path: &Path, len: usize) -> Result<Dataset> {
    let bytes = fs::read(path)?;
    let frames = read_iq_frames(&bytes, len)?;
    let label_text = fs::read_to_string(labels_path(path))?;
    let labels: Vec<usize> = label_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad label `{}`", l.trim())))
        })
        .collect::<Result<_>>()?;
    if labels.len() != frames.len() {
        return Err(Error::Format(format!("{} frames but {} labels", frames.len(), labels.len())));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let records = frames
        .into_iter()
        .zip(&labels)
        .map(|((i, q), &label)| {
            let samples = i.iter().chain(&q).map(|&v| v as f64).collect();
            let mut rec = EnvelopeSignal::new(2, samples, label);
            rec.normalize_rms();
            rec
        })
        .collect();
    Dataset::new(2, len, classes, records, SplitTag::Train, format!("iq sha256:{}", file_digest(&bytes)))
}

/// Writes two-channel records as interleaved `f32` frames plus the label sidecar.
pub fn write_iq(path: &Path, records: &[EnvelopeSignal<f64>]) -> Result<()> {
    let mut bytes = Vec::new();
    let mut labels = String::new();
    for r in records {
        if r.channels != 2 {
            return Err(Error::Shape(format!("I/Q records need 2 channels, got {}", r.channels)));
        }
        for (&i, &q) in r.channel(0).iter().zip(r.channel(1)) {
            bytes.extend_from_slice(&(i as f32).to_le_bytes());
            bytes.extend_from_slice(&(q as f32).to_le_bytes());
        }
        labels.push_str(&format!("{}\n", r.label));
    }
    fs::write(path, bytes)?;
    fs::write(labels_path(path), labels)?;
    Ok(())
}
