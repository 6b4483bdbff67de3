//! Hierarchical skill library: declarative manifests and their dependency DAG.
//!
//! Skills live on three layers. The interface layer routes intent, the
//! subagent layer orchestrates one domain each (tool, modality, model, or
//! dataset skills), and the base layer holds atomic single-command
//! operations. Dependency edges always point downward or sideways within
//! the subagent layer, never upward, and the whole relation must be
//! acyclic.

mod graph;
mod load;
mod manifest;

pub use graph::{
    execution_closure, topological_plan, validate_graph, Finding, Severity, SkillGraph,
    ValidationReport,
};
pub use load::load_registry;
pub use manifest::{
    ArtifactKind, ArtifactSlot, Layer, SkillId, SkillManifest, StepMode, StepTemplate,
    SubagentKind,
};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SkillError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {field}: {detail}")]
    Parse {
        path: PathBuf,
        field: String,
        detail: String,
    },
    #[error("duplicate skill id {id:?} in {first} and {second}")]
    DuplicateId {
        id: String,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("unknown skill id {0:?}")]
    UnknownTarget(String),
    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}
