//! Single trials, density-by-speed batches, aggregation and reports.

mod batch;
mod config;
mod report;
mod trial;

use std::path::Path;

use thiserror::Error;

use crate::memory::MemoryError;
use crate::planner::PlannerError;
use crate::sim::SimError;

pub use batch::{
    aggregate, config_hash, decision_count, derive_seed, endpoints, run_batch, trial_config,
    BatchReport, BatchSpec, BatchTiming, CellAggregate, CellTiming, RunMetadata, Summary,
    TrialRecord, ENDPOINTS_PER_SEED,
};
pub use config::{
    trial_camera, trial_memory, NoiseConfig, Rates, ResolvedWorld, TrialConfig, WorldConfig,
};
pub use report::{
    load_batch, write_batch, write_report, write_timing, write_trial, Format, BATCH_FILE,
    CELL_COLUMNS, METADATA_FILE, TIMING_FILE, TRIAL_COLUMNS,
};
pub use trial::{
    body_pose, run_trial, run_trial_opts, run_trial_with, Outcome, TrialOptions, TrialResult,
    TrialRun,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
