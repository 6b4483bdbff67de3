//! Skill manifest schema.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Lowercase skill identifier: `[a-z0-9][a-z0-9-]*`.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(try_from = "String", into = "String")]
pub struct SkillId(String);

impl TryFrom<String> for SkillId {
    type Error = String;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        SkillId::new(value)
    }
}

impl From<SkillId> for String {
    fn from(id: SkillId) -> String {
        id.0
    }
}

impl SkillId {
    pub fn new(id: impl Into<String>) -> Result<Self, String> {
        let id = id.into();
        if Self::is_valid(&id) {
            Ok(SkillId(id))
        } else {
            Err(format!(
                "skill id {id:?} must match [a-z0-9][a-z0-9-]*"
            ))
        }
    }

    pub fn is_valid(id: &str) -> bool {
        let mut chars = id.chars();
        match chars.next() {
            Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SkillId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for SkillId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Hierarchy layer. Edges must flow toward lower ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Interface,
    Subagent,
    Base,
}

impl Layer {
    /// interface=2, subagent=1, base=0.
    pub fn rank(self) -> u8 {
        match self {
            Layer::Interface => 2,
            Layer::Subagent => 1,
            Layer::Base => 0,
        }
    }

    pub fn dir_name(self) -> &'static str {
        match self {
            Layer::Interface => "interface",
            Layer::Subagent => "subagent",
            Layer::Base => "base",
        }
    }
}

/// Subagent specialization. Present exactly when `layer = subagent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubagentKind {
    Tool,
    Modality,
    Model,
    Dataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Image,
    Table,
    Report,
    Log,
    Other,
}

/// A named input or output of a skill: a glob over workspace-relative paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactSlot {
    pub name: String,
    pub pattern: String,
    pub kind: ArtifactKind,
    pub required: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    Execute,
    #[default]
    Stub,
}

fn default_exit() -> i32 {
    0
}

/// One command template of a skill. `${slot}` placeholders refer to the
/// owning skill's declared input and output slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTemplate {
    pub step_id: String,
    pub command: Vec<String>,
    #[serde(default)]
    pub mode: StepMode,
    #[serde(default = "default_exit")]
    pub expected_exit: i32,
}

impl StepTemplate {
    /// Every `${...}` placeholder name appearing in the command tokens.
    pub fn placeholders(&self) -> Vec<String> {
        let mut out = Vec::new();
        for token in &self.command {
            let mut rest = token.as_str();
            while let Some(start) = rest.find("${") {
                let tail = &rest[start + 2..];
                match tail.find('}') {
                    Some(end) => {
                        out.push(tail[..end].to_string());
                        rest = &tail[end + 1..];
                    }
                    None => break,
                }
            }
        }
        out
    }
}

/// A declarative skill description as loaded from one `.skill` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillManifest {
    pub id: SkillId,
    pub layer: Layer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SubagentKind>,
    pub title: String,
    pub description: String,
    #[serde(default)]
    pub dependencies: Vec<SkillId>,
    #[serde(default)]
    pub inputs: Vec<ArtifactSlot>,
    #[serde(default)]
    pub outputs: Vec<ArtifactSlot>,
    #[serde(default)]
    pub steps: Vec<StepTemplate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<String>,
}

impl SkillManifest {
    /// Slot names visible to step placeholders (inputs then outputs).
    pub fn slot_names(&self) -> Vec<&str> {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .map(|s| s.name.as_str())
            .collect()
    }

    pub fn slot(&self, name: &str) -> Option<&ArtifactSlot> {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .find(|s| s.name == name)
    }

    pub fn is_output_slot(&self, name: &str) -> bool {
        self.outputs.iter().any(|s| s.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_charset() {
        assert!(SkillId::new("fmri-skill").is_ok());
        assert!(SkillId::new("9to5").is_ok());
        assert!(SkillId::new("-bad").is_err());
        assert!(SkillId::new("Bad").is_err());
        assert!(SkillId::new("").is_err());
        assert!(SkillId::new("has space").is_err());
    }

    #[test]
    fn layer_ranks() {
        assert_eq!(Layer::Interface.rank(), 2);
        assert_eq!(Layer::Subagent.rank(), 1);
        assert_eq!(Layer::Base.rank(), 0);
    }

    #[test]
    fn placeholders_are_extracted_in_order() {
        let step = StepTemplate {
            step_id: "s".into(),
            command: vec![
                "convert".into(),
                "${raw}".into(),
                "--out=${nifti}".into(),
                "${raw}/${nifti}".into(),
            ],
            mode: StepMode::Stub,
            expected_exit: 0,
        };
        assert_eq!(step.placeholders(), vec!["raw", "nifti", "raw", "nifti"]);
    }

    #[test]
    fn manifest_parses_with_defaults() {
        let json = r#"{
            "id": "bids-validate",
            "layer": "base",
            "title": "BIDS validation",
            "description": "checks dataset layout",
            "steps": [{"step_id": "check", "command": ["true"], "mode": "stub"}]
        }"#;
        let m: SkillManifest = serde_json::from_str(json).unwrap();
        assert_eq!(m.id.as_str(), "bids-validate");
        assert!(m.dependencies.is_empty());
        assert_eq!(m.steps[0].expected_exit, 0);
        assert!(m.kind.is_none());
    }

    #[test]
    fn bad_enum_is_rejected() {
        let json = r#"{"id":"x","layer":"middleware","title":"t","description":"d"}"#;
        assert!(serde_json::from_str::<SkillManifest>(json).is_err());
    }
}
