//! IDX reader for the MNIST digit files.

use std::fs;
use std::path::Path;

use super::{file_digest, Dataset, EnvelopeSignal, SplitTag};
use crate::error::{Error, Result};

pub const MNIST_LEN: usize = 784;
pub const MNIST_CLASSES: usize = 10;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("truncated IDX header at byte {at}")))
}

fn expect_len(bytes: &[u8], expected: usize, what: &str) -> Result<()> {
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{what}: expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format(format!("bad IDX image magic {magic:#010x}")));
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let body = count
        .checked_mul(rows)
        .and_then(|n| n.checked_mul(cols))
        .ok_or_else(|| Error::Format("IDX dimensions overflow".into()))?;
    expect_len(bytes, 16 + body, "IDX image file")?;
    Ok(IdxImages { count, rows, cols, pixels: bytes[16..].to_vec() })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(Error::Format(format!("bad IDX label magic {magic:#010x}")));
    }
    let count = be_u32(bytes, 4)? as usize;
    expect_len(bytes, 8 + count, "IDX label file")?;
    Ok(bytes[8..].to_vec())
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IMAGES_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn load_mnist(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    load_mnist_subset(images_path, labels_path, None)
}

/// Loads at most `limit` records (in file order), each image flattened
/// row-major to 784 samples and scaled to unit RMS.
pub fn load_mnist_subset(images_path: &Path, labels_path: &Path, limit: Option<usize>) -> Result<Dataset> {
    let image_bytes = fs::read(images_path)?;
    let label_bytes = fs::read(labels_path)?;
    let images = parse_idx_images(&image_bytes)?;
    let labels = parse_idx_labels(&label_bytes)?;
    if images.count != labels.len() {
        return Err(Error::Format(format!(
            "{} images but {} labels",
            images.count,
            labels.len()
        )));
    }
    let len = images.rows * images.cols;
    let n = limit.map_or(images.count, |l| l.min(images.count));
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let label = labels[i] as usize;
        if label >= MNIST_CLASSES {
            return Err(Error::LabelOutOfRange { label, classes: MNIST_CLASSES });
        }
        let samples = images.pixels[i * len..(i + 1) * len].iter().map(|&p| p as f64).collect();
        let mut rec = EnvelopeSignal::new(1, samples, label);
        rec.normalize_rms();
        records.push(rec);
    }
    let split = if images_path.to_string_lossy().contains("t10k") { SplitTag::Test } else { SplitTag::Train };
    let provenance = format!(
        "mnist images sha256:{} labels sha256:{}",
        file_digest(&image_bytes),
        file_digest(&label_bytes)
    );
    Dataset::new(1, len, MNIST_CLASSES, records, split, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(pixels: Vec<u8>, count: usize) -> IdxImages {
        IdxImages { count, rows: 28, cols: 28, pixels }
    }

    #[test]
    fn header_round_trip() {
        let img = tiny(vec![7; 2 * 784], 2);
        let parsed = parse_idx_images(&encode_idx_images(&img)).unwrap();
        assert_eq!(parsed, img);
        assert_eq!(parse_idx_labels(&encode_idx_labels(&[3, 4])).unwrap(), vec![3, 4]);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode_idx_labels(&[1]);
        bytes[3] = 0x03;
        assert!(matches!(parse_idx_labels(&bytes), Err(Error::Format(_))));
        let mut bytes = encode_idx_images(&tiny(vec![0; 784], 1));
        bytes[3] = 0x01;
        assert!(parse_idx_images(&bytes).is_err());
    }

    #[test]
    fn constant_and_blank_images() {
        let dir = tempfile::tempdir().unwrap();
        let mut pixels = vec![0u8; 2 * 784];
        pixels[..784].fill(200);
        let ip = dir.path().join("img");
        let lp = dir.path().join("lbl");
        fs::write(&ip, encode_idx_images(&tiny(pixels, 2))).unwrap();
        fs::write(&lp, encode_idx_labels(&[5, 0])).unwrap();
        let ds = load_mnist(&ip, &lp).unwrap();
        assert_eq!(ds.len(), 2);
        assert!(ds.records[0].samples.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        assert!(ds.records[1].zero_rms);
        assert!(ds.records[1].samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("img");
        let lp = dir.path().join("lbl");
        fs::write(&ip, encode_idx_images(&tiny(vec![1; 784], 1))).unwrap();
        fs::write(&lp, encode_idx_labels(&[1, 2])).unwrap();
        assert!(matches!(load_mnist(&ip, &lp), Err(Error::Format(_))));
    }
}
