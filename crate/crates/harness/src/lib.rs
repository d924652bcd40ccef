//! Experiment orchestration: configuration, noiseless training, linewidth
//! search, power sweeps with repeated noise trials, and reports.

pub mod config;
pub mod data;
pub mod error;
pub mod report;
pub mod search;
pub mod sweep;
pub mod train;
pub mod validate;

pub use config::{ExperimentConfig, Mode, Task};
pub use data::{load_task, TaskData};
pub use error::{HarnessError, Result};
pub use report::{emit_report, summary_table, ReportFiles};
pub use search::{gamma_search, select_best, GammaSearch};
pub use sweep::{power_sweep, SweepResult};
pub use train::{load_training, run_training, save_training, TrainOutcome};
pub use validate::{assumption_report, AssumptionReport};
