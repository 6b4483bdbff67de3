//! Task definitions loaded from `.task` files (JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pathglob::validate_pattern;
use crate::record::read_json;
use crate::skill::ArtifactSlot;
use crate::verify::{QcKind, QcRule, VerificationSpec};

use super::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskFamily {
    BasicUtilities,
    CorePipelines,
    AdvancedAnalysis,
    MultimodalIntegration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "sMRI")]
    Smri,
    #[serde(rename = "fMRI")]
    Fmri,
    #[serde(rename = "dMRI")]
    Dmri,
    #[serde(rename = "EEG")]
    Eeg,
}

/// The machine check backing one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckpointCheck {
    /// The named expected-artifact slot must match.
    Artifact { slot: String },
    /// Tables matching the pattern are screened for non-finite values.
    NumericScreen { pattern: String },
    /// Workspace files are compared against this digest manifest.
    Checksum { manifest: String },
    /// One QC rule applied to files matching the pattern.
    Qc { pattern: String, rule: QcKind },
}

/// A human-readable checkpoint bound to one verifiable check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskCheckpoint {
    pub description: String,
    #[serde(flatten)]
    pub bound_to: CheckpointCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// Shape `T` followed by three digits, e.g. `T004`.
    pub id: String,
    pub title: String,
    pub family: TaskFamily,
    #[serde(default)]
    pub modality_tags: Vec<Modality>,
    #[serde(default)]
    pub dataset_tags: Vec<String>,
    /// Data organization the fixture workspace is promised to satisfy.
    #[serde(default)]
    pub input_assumptions: String,
    pub objectives: String,
    pub expected_artifacts: Vec<ArtifactSlot>,
    /// Path patterns outputs are expected to follow; advisory, included
    /// in the agent brief.
    #[serde(default)]
    pub naming_conventions: Vec<String>,
    #[serde(default)]
    pub checkpoints: Vec<TaskCheckpoint>,
    /// Fixture workspace directory, relative to the fixtures root.
    pub fixture_workspace: String,
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !valid_task_id(&self.id) {
            return Err(format!("task id {:?} is not of the form T###", self.id));
        }
        if self.fixture_workspace.is_empty() {
            return Err("fixture_workspace is empty".to_string());
        }
        for (i, tag) in self.modality_tags.iter().enumerate() {
            if self.modality_tags[..i].contains(tag) {
                return Err(format!("duplicate modality tag {tag:?}"));
            }
        }
        for slot in &self.expected_artifacts {
            validate_pattern(&slot.pattern)
                .map_err(|e| format!("artifact {}: {e}", slot.name))?;
        }
        for pattern in &self.naming_conventions {
            validate_pattern(pattern).map_err(|e| format!("naming convention: {e}"))?;
        }
        let mut manifests = 0usize;
        for cp in &self.checkpoints {
            match &cp.bound_to {
                CheckpointCheck::Artifact { slot } => {
                    if !self.expected_artifacts.iter().any(|s| &s.name == slot) {
                        return Err(format!(
                            "checkpoint {:?} references unknown artifact slot {slot:?}",
                            cp.description
                        ));
                    }
                }
                CheckpointCheck::NumericScreen { pattern } => {
                    validate_pattern(pattern)
                        .map_err(|e| format!("checkpoint {:?}: {e}", cp.description))?;
                }
                CheckpointCheck::Checksum { manifest } => {
                    manifests += 1;
                    if manifest.is_empty() {
                        return Err(format!(
                            "checkpoint {:?} has an empty manifest path",
                            cp.description
                        ));
                    }
                }
                CheckpointCheck::Qc { pattern, .. } => {
                    validate_pattern(pattern)
                        .map_err(|e| format!("checkpoint {:?}: {e}", cp.description))?;
                }
            }
        }
        if manifests > 1 {
            return Err("more than one checksum checkpoint".to_string());
        }
        Ok(())
    }

    /// Assembles the workspace checks: every expected artifact plus the
    /// check behind each checkpoint.
    pub fn verification(&self) -> VerificationSpec {
        let mut spec = VerificationSpec {
            expected: self.expected_artifacts.clone(),
            ..VerificationSpec::default()
        };
        for cp in &self.checkpoints {
            match &cp.bound_to {
                CheckpointCheck::Artifact { .. } => {}
                CheckpointCheck::NumericScreen { pattern } => {
                    spec.numeric_screen.push(pattern.clone());
                }
                CheckpointCheck::Checksum { manifest } => {
                    spec.checksum_manifest = Some(manifest.clone());
                }
                CheckpointCheck::Qc { pattern, rule } => {
                    spec.qc_rules.push(QcRule { pattern: pattern.clone(), rule: rule.clone() });
                }
            }
        }
        spec
    }
}

fn valid_task_id(id: &str) -> bool {
    let bytes = id.as_bytes();
    bytes.len() == 4 && bytes[0] == b'T' && bytes[1..].iter().all(u8::is_ascii_digit)
}

/// Loads every `.task` file in `dir`, sorted by id. The file stem must
/// equal the task id it declares.
pub fn load_tasks(dir: &Path) -> Result<Vec<TaskSpec>, BenchError> {
    let mut tasks: Vec<TaskSpec> = Vec::new();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| BenchError::Io { path: dir.to_path_buf(), source: e })?;
    for entry in entries {
        let entry = entry.map_err(|e| BenchError::Io { path: dir.to_path_buf(), source: e })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("task") {
            continue;
        }
        let task: TaskSpec = read_json(&path)?;
        task.validate()
            .map_err(|detail| BenchError::BadTask { path: path.clone(), detail })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if stem != task.id {
            return Err(BenchError::BadTask {
                path,
                detail: format!("file stem {stem:?} does not match task id {:?}", task.id),
            });
        }
        if tasks.iter().any(|t| t.id == task.id) {
            return Err(BenchError::BadTask {
                path,
                detail: format!("duplicate task id {:?}", task.id),
            });
        }
        tasks.push(task);
    }
    tasks.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(tasks)
}
