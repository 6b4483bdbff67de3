//! Uniform interface to model backends for planning and judging.
//!
//! Everything the harness needs from a model goes through
//! [`AgentBackend`]: the scripted backend replays canned turns from a
//! fixture file for deterministic runs, and the HTTP backend speaks a
//! generic chat-completion wire shape for live models. Sessions track the
//! transcript, accumulated token usage, and the per-run call budget.

mod http;
mod judge;
mod scripted;
mod session;
mod tools;

pub use http::{HttpBackend, HttpBackendConfig};
pub use judge::{
    judge_with_backend, Judge, JudgeKey, JudgeScores, JudgeTableRow, LlmJudge, Rubric,
    RubricDimension, ScriptedJudgeTable,
};
pub use scripted::{FixtureTurn, ScriptedBackend};
pub use session::{
    AgentBackend, AgentSession, AssistantTurn, CompletionRequest, Message, RawToolCall, RawTurn,
    Role, Usage,
};
pub use tools::{parse_tool_call, StubWrite, ToolCall};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("call budget of {budget} exhausted")]
    BudgetExhausted { budget: u32 },
    #[error("scripted fixture {name} exhausted after {turns} turns")]
    FixtureExhausted { name: String, turns: usize },
    #[error("transport failure: {detail}")]
    Transport { detail: String },
    #[error("protocol violation: {detail}")]
    Protocol { detail: String },
    #[error("judge format error: {detail}")]
    JudgeFormat { detail: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Record(#[from] crate::record::RecordError),
}
