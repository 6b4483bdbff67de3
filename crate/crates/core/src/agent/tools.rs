//! The fixed tool vocabulary agents use during planning.
//!
//! Five tools exist: `list_skills`, `read_skill`, `propose_plan`,
//! `run_command`, and `finish`. Arguments are validated strictly; an
//! unknown tool name or an argument record that does not match the tool's
//! schema is a protocol violation, never a silent fallback.

use serde::{Deserialize, Serialize};

use crate::skill::StepMode;

use super::session::RawToolCall;
use super::AgentError;

/// A file an agent asks a stubbed command to leave behind. Paths are
/// workspace-relative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubWrite {
    pub path: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ToolCall {
    ListSkills,
    ReadSkill {
        id: String,
    },
    ProposePlan {
        targets: Vec<String>,
    },
    RunCommand {
        argv: Vec<String>,
        mode: StepMode,
        writes: Vec<StubWrite>,
    },
    Finish,
}

impl ToolCall {
    pub fn name(&self) -> &'static str {
        match self {
            ToolCall::ListSkills => "list_skills",
            ToolCall::ReadSkill { .. } => "read_skill",
            ToolCall::ProposePlan { .. } => "propose_plan",
            ToolCall::RunCommand { .. } => "run_command",
            ToolCall::Finish => "finish",
        }
    }

    /// Wire form of this call, inverse of [`parse_tool_call`].
    pub fn to_raw(&self) -> RawToolCall {
        let arguments = match self {
            ToolCall::ListSkills | ToolCall::Finish => serde_json::json!({}),
            ToolCall::ReadSkill { id } => serde_json::json!({ "id": id }),
            ToolCall::ProposePlan { targets } => serde_json::json!({ "targets": targets }),
            ToolCall::RunCommand { argv, mode, writes } => serde_json::json!({
                "argv": argv,
                "mode": mode,
                "writes": writes,
            }),
        };
        RawToolCall { name: self.name().to_string(), arguments }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoArgs {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReadSkillArgs {
    id: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProposePlanArgs {
    targets: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunCommandArgs {
    argv: Vec<String>,
    #[serde(default)]
    mode: StepMode,
    #[serde(default)]
    writes: Vec<StubWrite>,
}

/// Validates one raw call against the tool vocabulary.
pub fn parse_tool_call(raw: &RawToolCall) -> Result<ToolCall, AgentError> {
    fn args<T: serde::de::DeserializeOwned>(raw: &RawToolCall) -> Result<T, AgentError> {
        serde_json::from_value(raw.arguments.clone()).map_err(|e| AgentError::Protocol {
            detail: format!("bad arguments for tool {}: {e}", raw.name),
        })
    }
    match raw.name.as_str() {
        "list_skills" => {
            let NoArgs {} = args(raw)?;
            Ok(ToolCall::ListSkills)
        }
        "read_skill" => {
            let a: ReadSkillArgs = args(raw)?;
            Ok(ToolCall::ReadSkill { id: a.id })
        }
        "propose_plan" => {
            let a: ProposePlanArgs = args(raw)?;
            if a.targets.is_empty() {
                return Err(AgentError::Protocol {
                    detail: "bad arguments for tool propose_plan: targets must be non-empty".into(),
                });
            }
            Ok(ToolCall::ProposePlan { targets: a.targets })
        }
        "run_command" => {
            let a: RunCommandArgs = args(raw)?;
            if a.argv.is_empty() {
                return Err(AgentError::Protocol {
                    detail: "bad arguments for tool run_command: argv must be non-empty".into(),
                });
            }
            Ok(ToolCall::RunCommand { argv: a.argv, mode: a.mode, writes: a.writes })
        }
        "finish" => {
            let NoArgs {} = args(raw)?;
            Ok(ToolCall::Finish)
        }
        other => Err(AgentError::Protocol { detail: format!("unknown tool {other}") }),
    }
}
