//! Human-activity feature vectors: whitespace-separated text rows of 561
//! reals, with a label file holding one activity id (1–6) per line.

use std::fs;
use std::path::Path;

use super::{file_digest, Dataset, EnvelopeSignal, SplitTag};
use crate::error::{Error, Result};

pub const HAR_LEN: usize = 561;
pub const HAR_CLASSES: usize = 6;

pub fn parse_har(features: &str, labels: &str) -> Result<Vec<EnvelopeSignal<f64>>> {
    let label_values: Vec<usize> = labels
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let v: usize = l
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("label line {}: `{}` is not an integer", i + 1, l.trim())))?;
            if !(1..=HAR_CLASSES).contains(&v) {
                return Err(Error::Format(format!("label line {}: activity {v} outside 1..=6", i + 1)));
            }
            Ok(v - 1)
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(label_values.len());
    for (i, line) in features.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Format(format!("row {}: `{t}` is not a number", i + 1)))
            })
            .collect::<Result<_>>()?;
        if row.len() != HAR_LEN {
            return Err(Error::Format(format!("row {} has {} values, expected {HAR_LEN}", i + 1, row.len())));
        }
        let label = *label_values
            .get(i)
            .ok_or_else(|| Error::Format(format!("no label for row {}", i + 1)))?;
        let mut rec = EnvelopeSignal::new(1, row, label);
        rec.normalize_rms();
        records.push(rec);
    }
    if records.len() != label_values.len() {
        return Err(Error::Format(format!(
            "{} feature rows but {} labels",
            records.len(),
            label_values.len()
        )));
    }
    Ok(records)
}

pub fn load_har(features_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let features = fs::read_to_string(features_path)?;
    let labels = fs::read_to_string(labels_path)?;
    let records = parse_har(&features, &labels)?;
    let split = if features_path.to_string_lossy().contains("test") { SplitTag::Test } else { SplitTag::Train };
    let provenance = format!(
        "har features sha256:{} labels sha256:{}",
        file_digest(features.as_bytes()),
        file_digest(labels.as_bytes())
    );
    Dataset::new(1, HAR_LEN, HAR_CLASSES, records, split, provenance)
}
