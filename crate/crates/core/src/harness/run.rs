//! Run identity, phases, and the persisted run record.

use serde::{Deserialize, Serialize};

use crate::timeutil::Timestamp;

use super::plan::PlanStage;

/// Lifecycle of a run. The four working phases happen in order; a run
/// ends in `completed` only when verification passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Decompose,
    Initialize,
    Execute,
    Verify,
    Completed,
    Failed,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Decompose => "decompose",
            Phase::Initialize => "initialize",
            Phase::Execute => "execute",
            Phase::Verify => "verify",
            Phase::Completed => "completed",
            Phase::Failed => "failed",
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Phase::Completed | Phase::Failed)
    }
}

/// Whether the agent plans over the skill registry or works bare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    WithSkills,
    NoSkills,
}

impl Setting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Setting::WithSkills => "with_skills",
            Setting::NoSkills => "no_skills",
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "with_skills" => Ok(Setting::WithSkills),
            "no_skills" => Ok(Setting::NoSkills),
            other => {
                Err(format!("unknown setting {other:?}, expected with_skills or no_skills"))
            }
        }
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cost counters for one run. `tokens` sums prompt and completion tokens
/// of every planning call; judge traffic is not part of the run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub skill_calls: u64,
    pub tokens: u64,
    pub elapsed_seconds: f64,
}

/// The persisted state of one run (`run.json`), rewritten atomically at
/// every phase and stage boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub task_id: String,
    pub setting: Setting,
    pub model_ref: String,
    pub repetition: u32,
    pub phase: Phase,
    pub plan: Vec<PlanStage>,
    /// Stage ids that finished, in execution order.
    pub completed_stages: Vec<String>,
    /// Workspace directory name inside the run directory.
    pub workspace: String,
    pub started_at: Timestamp,
    pub ended_at: Option<Timestamp>,
    pub metrics: RunMetrics,
}

/// Fresh run id: timestamp plus a random suffix so concurrent runs never
/// collide. Only used as a directory name and a correlation key.
pub fn new_run_id(now: Timestamp) -> String {
    let suffix: u32 = rand::random();
    format!("run-{}-{suffix:08x}", now.compact())
}
