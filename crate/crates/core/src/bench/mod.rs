//! Benchmark driver: task definitions, the run matrix, and the
//! completion rules that decide which cells are comparable.

mod matrix;
mod provider;
mod subset;
mod task;

pub use matrix::{
    load_rows, run_matrix, BackendProvider, MatrixOutcome, MatrixSpec, RunResultRow,
};
pub use provider::{HttpProvider, TurnsDirProvider};
pub use subset::{
    align_repetitions, common_subset, CompletionRule, RepAlignment, SubsetReport,
};
pub use task::{
    load_tasks, CheckpointCheck, Modality, TaskCheckpoint, TaskFamily, TaskSpec,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Record(#[from] crate::record::RecordError),
    #[error(transparent)]
    Harness(#[from] crate::harness::HarnessError),
    #[error(transparent)]
    Agent(#[from] crate::agent::AgentError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("task file {path}: {detail}")]
    BadTask { path: PathBuf, detail: String },
    #[error("no fixture for model {model_ref:?}, task {task_id}, setting {setting}")]
    MissingFixture { model_ref: String, task_id: String, setting: String },
}
