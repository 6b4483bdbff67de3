//! The execution harness: four-phase runs with checkpoints and resume.
//!
//! A run moves through decompose (agent turns task into a plan),
//! initialize (workspace copy plus environment manifest), execute (plan
//! stages with artifact tracking), and verify (workspace checks). Every
//! observable step lands in an append-only audit log with gapless
//! sequence numbers, and checkpoints at stage and phase boundaries make
//! any run resumable after an interrupt.

mod audit;
mod checkpoint;
mod envmanifest;
mod executor;
mod plan;
mod report;
mod run;

pub use audit::{
    normalized_audit_lines, read_audit, AuditEvent, AuditLog, AuditPayload, DriftChange, Outcome,
};
pub use checkpoint::{checkpoint_file_name, latest_checkpoint, Checkpoint};
pub use envmanifest::{capture_env, env_drift, EnvCaptureConfig, EnvManifest, ProbeFailure};
pub use executor::{resume_run, run_task, RunCompletion, RunOutcome, RunRequest};
pub use plan::{stage_from_command, stage_from_skill, PlanStage, PlanStep};
pub use report::{ArtifactRecord, RunReport, StageSummary};
pub use run::{new_run_id, Phase, RunMetrics, RunRecord, Setting};

use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Record(#[from] crate::record::RecordError),
    #[error(transparent)]
    Digest(#[from] crate::digest::DigestError),
    #[error(transparent)]
    Skill(#[from] crate::skill::SkillError),
    #[error(transparent)]
    Agent(#[from] crate::agent::AgentError),
    #[error(transparent)]
    Verify(#[from] crate::verify::VerifyError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("run directory {0} already exists")]
    RunExists(PathBuf),
    #[error("run {run_id} has no checkpoint to resume from")]
    NoCheckpoint { run_id: String },
    #[error("run {run_id} already finished in phase {phase}")]
    RunFinished { run_id: String, phase: String },
    #[error("run {run_id} is corrupt: {detail}")]
    Corrupt { run_id: String, detail: String },
    #[error("run belongs to task {run_task}, not {given_task}")]
    TaskMismatch { run_task: String, given_task: String },
}

/// How to react when a resumed workspace no longer matches the digests
/// recorded in the checkpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftPolicy {
    /// Log drift and continue.
    #[default]
    Warn,
    /// Log drift and fail the run.
    Strict,
}

impl std::str::FromStr for DriftPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "warn" => Ok(DriftPolicy::Warn),
            "strict" => Ok(DriftPolicy::Strict),
            other => Err(format!("unknown drift policy {other:?}, expected warn or strict")),
        }
    }
}

/// Harness-wide settings shared by every run.
#[derive(Debug, Clone)]
pub struct HarnessConfig {
    /// Directory that holds one subdirectory per run.
    pub runs_root: PathBuf,
    pub drift: DriftPolicy,
    /// Backend calls an agent may make during decomposition.
    pub call_budget: u32,
    pub env: EnvCaptureConfig,
}

impl HarnessConfig {
    pub fn new(runs_root: impl Into<PathBuf>) -> Self {
        HarnessConfig {
            runs_root: runs_root.into(),
            drift: DriftPolicy::Warn,
            call_budget: 16,
            env: EnvCaptureConfig::default(),
        }
    }
}

/// Fixed layout inside one run directory.
#[derive(Debug, Clone)]
pub struct RunPaths {
    pub run_dir: PathBuf,
}

impl RunPaths {
    pub fn new(run_dir: impl Into<PathBuf>) -> Self {
        RunPaths { run_dir: run_dir.into() }
    }

    pub fn audit(&self) -> PathBuf {
        self.run_dir.join("audit.jsonl")
    }

    pub fn manifest(&self) -> PathBuf {
        self.run_dir.join("manifest.json")
    }

    pub fn run_record(&self) -> PathBuf {
        self.run_dir.join("run.json")
    }

    pub fn report(&self) -> PathBuf {
        self.run_dir.join("report.json")
    }

    pub fn checkpoints(&self) -> PathBuf {
        self.run_dir.join("checkpoints")
    }

    pub fn workspace(&self) -> PathBuf {
        self.run_dir.join("workspace")
    }

    pub fn logs(&self) -> PathBuf {
        self.run_dir.join("logs")
    }
}

/// Copies a directory tree of regular files. Relative structure is
/// preserved; symlinks and special files are skipped.
pub(crate) fn copy_tree(from: &Path, to: &Path) -> Result<(), HarnessError> {
    let io_err = |path: &Path, source: std::io::Error| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(to).map_err(|e| io_err(to, e))?;
    for entry in walkdir::WalkDir::new(from).sort_by_file_name() {
        let entry = entry.map_err(|e| HarnessError::Io {
            path: from.to_path_buf(),
            source: e.into(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(from).expect("walked under root");
        let dest = to.join(rel);
        if let Some(parent) = dest.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        std::fs::copy(entry.path(), &dest).map_err(|e| io_err(&dest, e))?;
    }
    Ok(())
}
