//! Configuration, paired batches and reports for `ccmab-core` experiments.

pub mod batch;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod report;

pub use batch::{batch_paired, pair_seeds, Pair};
pub use config::{parse_config, Algo, CceaSchedule, ExperimentConfig, ProblemKind, Protocol};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, Instance, RunOutcome, Trace};
pub use report::{build_report, write_report, Report, RunRecord};
