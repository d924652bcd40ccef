//! Resolves the configured task into train / validation / test sets.

use std::path::{Path, PathBuf};

use mirp_core::datasets::{default_data_dir, load_har, load_iq, load_mnist_subset, synth_rfmod, Dataset, SplitTag, RFMOD_CLASSES};
use mirp_core::rng::stream_id;

use crate::config::{ExperimentConfig, RfmodSource, Task};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone)]
pub struct TaskData {
    pub task: Task,
    pub train: Dataset,
    pub validation: Option<Dataset>,
    pub test: Dataset,
}

impl TaskData {
    pub fn channels(&self) -> usize {
        self.test.channels
    }
    pub fn len(&self) -> usize {
        self.test.len
    }
    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }
    pub fn classes(&self) -> usize {
        self.test.classes
    }
}

pub fn data_dir(cfg: &ExperimentConfig) -> PathBuf {
    if cfg.data.dir.is_empty() {
        default_data_dir()
    } else {
        PathBuf::from(&cfg.data.dir)
    }
}

fn require(paths: &[&Path], what: &str) -> Result<()> {
    let missing: Vec<String> = paths.iter().filter(|p| !p.is_file()).map(|p| p.display().to_string()).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::DatasetMissing(format!(
            "{what}: missing {}; point data.dir or MIRP_DATA_DIR at the dataset directory",
            missing.join(", ")
        )))
    }
}

/// Splits a training pool into its first `train` records and the following
/// `validation` records.
fn carve(mut pool: Dataset, train: usize, validation: usize) -> Result<(Dataset, Option<Dataset>)> {
    let validation = validation.min(pool.len().saturating_sub(1));
    let train = train.min(pool.len() - validation);
    if train == 0 {
        return Err(HarnessError::Format("training split is empty".into()));
    }
    let val = (validation > 0).then(|| {
        let idx: Vec<usize> = (train..train + validation).collect();
        pool.select(&idx, SplitTag::Train)
    });
    pool.truncate(train);
    Ok((pool, val))
}

pub fn load_task(cfg: &ExperimentConfig) -> Result<TaskData> {
    let dir = data_dir(cfg);
    let d = &cfg.data;
    let (train, validation, test) = match cfg.experiment.task {
        Task::Mnist => {
            let m = dir.join("mnist");
            let files = [
                m.join("train-images-idx3-ubyte"),
                m.join("train-labels-idx1-ubyte"),
                m.join("t10k-images-idx3-ubyte"),
                m.join("t10k-labels-idx1-ubyte"),
            ];
            require(&files.iter().map(PathBuf::as_path).collect::<Vec<_>>(), "MNIST IDX files")?;
            let pool = load_mnist_subset(&files[0], &files[1], Some(d.train_records + d.validation_records))?;
            let test = load_mnist_subset(&files[2], &files[3], Some(d.test_records))?;
            let (train, val) = carve(pool, d.train_records, d.validation_records)?;
            (train, val, test)
        }
        Task::Rfmod => match d.rfmod_source {
            RfmodSource::Synthetic => {
                let seed = cfg.experiment.seed;
                let make = |part: u64, n: usize, split| -> Result<Dataset> {
                    let mut ds = synth_rfmod(stream_id(seed, &[0x5f, part]), n.div_ceil(RFMOD_CLASSES), d.rfmod_len, d.rfmod_snr_db)?;
                    ds.truncate(n);
                    ds.split = split;
                    Ok(ds)
                };
                let train = make(0, d.train_records, SplitTag::Train)?;
                let val = if d.validation_records > 0 { Some(make(1, d.validation_records, SplitTag::Train)?) } else { None };
                (train, val, make(2, d.test_records, SplitTag::Test)?)
            }
            RfmodSource::Iq => {
                let (tr, te) = (dir.join("rfmod/train.iq"), dir.join("rfmod/test.iq"));
                let (trl, tel) = (dir.join("rfmod/train.iq.labels"), dir.join("rfmod/test.iq.labels"));
                require(&[&tr, &trl, &te, &tel], "I/Q frames")?;
                let pool = load_iq(&tr, d.rfmod_len)?;
                let mut test = load_iq(&te, d.rfmod_len)?;
                test.truncate(d.test_records);
                test.split = SplitTag::Test;
                let (train, val) = carve(pool, d.train_records, d.validation_records)?;
                (train, val, test)
            }
        },
        Task::Har => {
            let h = dir.join("har");
            let files = [
                h.join("train/X_train.txt"),
                h.join("train/y_train.txt"),
                h.join("test/X_test.txt"),
                h.join("test/y_test.txt"),
            ];
            require(&files.iter().map(PathBuf::as_path).collect::<Vec<_>>(), "HAR feature files")?;
            let pool = load_har(&files[0], &files[1])?;
            let mut test = load_har(&files[2], &files[3])?;
            test.truncate(d.test_records);
            let (train, val) = carve(pool, d.train_records, d.validation_records)?;
            (train, val, test)
        }
    };
    if train.classes != test.classes || train.channels != test.channels || train.len != test.len {
        return Err(HarnessError::Format("train and test sets disagree in shape or class count".into()));
    }
    Ok(TaskData { task: cfg.experiment.task, train, validation, test })
}

/// Record count and per-record length from an IDX image file header.
pub fn idx_header(path: &Path) -> Result<(usize, usize)> {
    use std::io::Read;
    let mut head = [0u8; 16];
    std::fs::File::open(path)
        .and_then(|mut f| f.read_exact(&mut head))
        .map_err(|e| HarnessError::DatasetMissing(format!("{}: {e}", path.display())))?;
    let word = |i: usize| u32::from_be_bytes(head[i..i + 4].try_into().expect("4 bytes")) as usize;
    if word(0) != 0x0803 {
        return Err(HarnessError::Format(format!("{}: not an IDX image file", path.display())));
    }
    Ok((word(4), word(8) * word(12)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSummary {
    pub name: &'static str,
    pub records: usize,
    pub channels: usize,
    pub len: usize,
    pub class_counts: Vec<usize>,
    /// Mean, min and max per-channel RMS of the stored records.
    pub rms: [f64; 3],
    pub zero_rms_records: usize,
}

pub fn summarize(name: &'static str, ds: &Dataset) -> SplitSummary {
    let rms: Vec<f64> = ds.records.iter().flat_map(|r| (0..r.channels).map(move |j| r.channel_rms(j))).collect();
    let mean = rms.iter().sum::<f64>() / rms.len().max(1) as f64;
    SplitSummary {
        name,
        records: ds.len(),
        channels: ds.channels,
        len: ds.len,
        class_counts: ds.class_counts(),
        rms: [
            mean,
            rms.iter().copied().fold(f64::INFINITY, f64::min),
            rms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ],
        zero_rms_records: ds.records.iter().filter(|r| r.zero_rms).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rfmod_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.task = Task::Rfmod;
        cfg.data.train_records = 10;
        cfg.data.validation_records = 6;
        cfg.data.test_records = 7;
        cfg.data.rfmod_len = 64;
        cfg
    }

    #[test]
    fn synthetic_rfmod_splits_are_disjoint_and_sized() {
        let t = load_task(&rfmod_cfg()).unwrap();
        assert_eq!((t.train.len(), t.validation.as_ref().unwrap().len(), t.test.len()), (10, 6, 7));
        assert_eq!((t.channels(), t.len(), t.classes()), (2, 64, 4));
        let a = &t.train.records[0].samples;
        assert!(t.test.records.iter().all(|r| &r.samples != a));
        assert_eq!(t.test.split, SplitTag::Test);
        let again = load_task(&rfmod_cfg()).unwrap();
        assert_eq!(again.train.content_hash(), t.train.content_hash());
    }

    #[test]
    fn missing_files_are_reported() {
        let mut cfg = ExperimentConfig::default();
        cfg.data.dir = "/nonexistent/mirp".into();
        for task in [Task::Mnist, Task::Har] {
            cfg.experiment.task = task;
            assert!(matches!(load_task(&cfg), Err(HarnessError::DatasetMissing(_))));
        }
        cfg.experiment.task = Task::Rfmod;
        cfg.data.rfmod_source = RfmodSource::Iq;
        assert!(matches!(load_task(&cfg), Err(HarnessError::DatasetMissing(_))));
    }

    #[test]
    fn carve_keeps_order() {
        let t = load_task(&rfmod_cfg()).unwrap();
        let pool = t.train.clone();
        let (tr, val) = carve(pool.clone(), 7, 3).unwrap();
        assert_eq!(tr.len(), 7);
        assert_eq!(val.unwrap().records[0].samples, pool.records[7].samples);
        let (tr, val) = carve(pool, 100, 0).unwrap();
        assert_eq!(tr.len(), 10);
        assert!(val.is_none());
    }
}
