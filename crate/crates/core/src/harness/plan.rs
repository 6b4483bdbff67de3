//! Resolved execution plans.
//!
//! A plan stage binds either one skill (its steps, input and output
//! slots, and deterministic stub payloads for the outputs) or one ad-hoc
//! agent command. Plans are persisted inside the run record, so a resume
//! never needs the registry or the agent again.

use serde::{Deserialize, Serialize};

use crate::agent::StubWrite;
use crate::pathglob::instantiate;
use crate::skill::{ArtifactKind, ArtifactSlot, SkillId, SkillManifest, StepMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub step_id: String,
    /// Command argv; tokens may contain `${slot}` placeholders.
    pub command: Vec<String>,
    pub mode: StepMode,
    pub expected_exit: i32,
    /// Files an ad-hoc stub command leaves behind. Empty for skill steps.
    #[serde(default)]
    pub writes: Vec<StubWrite>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStage {
    pub stage_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skill_id: Option<SkillId>,
    pub steps: Vec<PlanStep>,
    #[serde(default)]
    pub inputs: Vec<ArtifactSlot>,
    #[serde(default)]
    pub outputs: Vec<ArtifactSlot>,
    /// One stub payload per output slot, same order. Applied after the
    /// steps for any slot still unmatched, so stubbed stages always
    /// satisfy their output contract.
    #[serde(default)]
    pub stub_writes: Vec<StubWrite>,
}

/// Stage executing one skill. The stage id is the skill id; steps come
/// straight from the manifest.
pub fn stage_from_skill(manifest: &SkillManifest) -> PlanStage {
    let steps = manifest
        .steps
        .iter()
        .map(|step| PlanStep {
            step_id: step.step_id.clone(),
            command: step.command.clone(),
            mode: step.mode,
            expected_exit: step.expected_exit,
            writes: Vec::new(),
        })
        .collect();
    let stub_writes = manifest
        .outputs
        .iter()
        .map(|slot| StubWrite {
            path: instantiate(&slot.pattern),
            content: stub_content(manifest.id.as_str(), slot),
        })
        .collect();
    PlanStage {
        stage_id: manifest.id.as_str().to_string(),
        skill_id: Some(manifest.id.clone()),
        steps,
        inputs: manifest.inputs.clone(),
        outputs: manifest.outputs.clone(),
        stub_writes,
    }
}

/// Stage for one agent-issued command in the no-skills setting.
pub fn stage_from_command(
    index: usize,
    argv: Vec<String>,
    mode: StepMode,
    writes: Vec<StubWrite>,
) -> PlanStage {
    PlanStage {
        stage_id: format!("cmd-{index:02}"),
        skill_id: None,
        steps: vec![PlanStep {
            step_id: "command".to_string(),
            command: argv,
            mode,
            expected_exit: 0,
            writes,
        }],
        inputs: Vec::new(),
        outputs: Vec::new(),
        stub_writes: Vec::new(),
    }
}

/// Deterministic stand-in content for a stubbed output slot. Tabular
/// slots get a parseable two-column table (finite values only), others a
/// one-line marker. Content depends only on the skill and the slot.
pub fn stub_content(skill_id: &str, slot: &ArtifactSlot) -> String {
    let path = instantiate(&slot.pattern);
    let tabular = matches!(slot.kind, ArtifactKind::Table)
        || path.ends_with(".csv")
        || path.ends_with(".tsv");
    if tabular {
        let sep = if path.ends_with(".tsv") { '\t' } else { ',' };
        return format!("name{sep}value\n{}{sep}1.000\n", slot.name);
    }
    match slot.kind {
        ArtifactKind::Log => format!("[stub] {skill_id} wrote {}\n", slot.name),
        ArtifactKind::Image => format!("stub-image {skill_id} {}\n", slot.name),
        _ => format!("stub artifact {} from {skill_id}\n", slot.name),
    }
}
