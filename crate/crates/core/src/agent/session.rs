//! Conversation state, token accounting, and the backend trait.

use serde::{Deserialize, Serialize};

use super::tools::{parse_tool_call, ToolCall};
use super::AgentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

/// One transcript entry. Tool results are sent back as `Role::Tool`
/// messages whose content is the serialized result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: Role::Assistant, content: content.into() }
    }

    pub fn tool(content: impl Into<String>) -> Self {
        Message { role: Role::Tool, content: content.into() }
    }
}

/// Token counts as reported by the backend. Scripted fixtures carry
/// explicit counts so metric totals stay reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
}

impl Usage {
    pub fn total(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }

    pub fn add(&mut self, other: Usage) {
        self.prompt_tokens += other.prompt_tokens;
        self.completion_tokens += other.completion_tokens;
    }
}

/// A tool call exactly as the backend produced it, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawToolCall {
    pub name: String,
    pub arguments: serde_json::Value,
}

/// One assistant turn as returned by a backend.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawTurn {
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub tool_calls: Vec<RawToolCall>,
    #[serde(default)]
    pub usage: Usage,
}

/// Full request sent to a backend: the entire transcript so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model_ref: String,
    pub messages: Vec<Message>,
}

/// An assistant turn after tool-call validation.
#[derive(Debug, Clone, PartialEq)]
pub struct AssistantTurn {
    pub text: String,
    pub tool_calls: Vec<ToolCall>,
    pub usage: Usage,
}

pub trait AgentBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<RawTurn, AgentError>;
}

/// A single model conversation with a hard cap on backend calls.
///
/// The budget is checked before each call; exhausting it is an error so a
/// looping agent cannot stall a run. Usage accumulates across calls.
pub struct AgentSession {
    model_ref: String,
    transcript: Vec<Message>,
    usage: Usage,
    call_budget: u32,
    calls_made: u32,
}

impl AgentSession {
    pub fn new(model_ref: impl Into<String>, call_budget: u32) -> Self {
        AgentSession {
            model_ref: model_ref.into(),
            transcript: Vec::new(),
            usage: Usage::default(),
            call_budget,
            calls_made: 0,
        }
    }

    pub fn model_ref(&self) -> &str {
        &self.model_ref
    }

    pub fn usage(&self) -> Usage {
        self.usage
    }

    pub fn calls_made(&self) -> u32 {
        self.calls_made
    }

    pub fn transcript(&self) -> &[Message] {
        &self.transcript
    }

    /// Appends `new_messages`, asks the backend for one assistant turn,
    /// validates its tool calls, and records everything in the transcript.
    pub fn complete(
        &mut self,
        backend: &dyn AgentBackend,
        new_messages: Vec<Message>,
    ) -> Result<AssistantTurn, AgentError> {
        if self.calls_made >= self.call_budget {
            return Err(AgentError::BudgetExhausted { budget: self.call_budget });
        }
        self.transcript.extend(new_messages);
        let request =
            CompletionRequest { model_ref: self.model_ref.clone(), messages: self.transcript.clone() };
        let raw = backend.complete(&request)?;
        self.calls_made += 1;
        self.usage.add(raw.usage);
        let mut tool_calls = Vec::with_capacity(raw.tool_calls.len());
        for call in &raw.tool_calls {
            tool_calls.push(parse_tool_call(call)?);
        }
        self.transcript.push(Message::assistant(raw.text.clone()));
        Ok(AssistantTurn { text: raw.text, tool_calls, usage: raw.usage })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FixedBackend(RawTurn);

    impl AgentBackend for FixedBackend {
        fn complete(&self, _request: &CompletionRequest) -> Result<RawTurn, AgentError> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn usage_accumulates_across_calls() {
        let backend = FixedBackend(RawTurn {
            text: "ok".into(),
            tool_calls: vec![],
            usage: Usage { prompt_tokens: 10, completion_tokens: 5 },
        });
        let mut session = AgentSession::new("m", 3);
        session.complete(&backend, vec![Message::user("a")]).unwrap();
        session.complete(&backend, vec![Message::user("b")]).unwrap();
        assert_eq!(session.usage(), Usage { prompt_tokens: 20, completion_tokens: 10 });
        assert_eq!(session.usage().total(), 30);
        assert_eq!(session.calls_made(), 2);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let backend = FixedBackend(RawTurn::default());
        let mut session = AgentSession::new("m", 1);
        session.complete(&backend, vec![Message::user("a")]).unwrap();
        let err = session.complete(&backend, vec![Message::user("b")]).unwrap_err();
        assert!(matches!(err, AgentError::BudgetExhausted { budget: 1 }));
    }

    #[test]
    fn transcript_holds_both_sides() {
        let backend = FixedBackend(RawTurn { text: "reply".into(), ..RawTurn::default() });
        let mut session = AgentSession::new("m", 2);
        session.complete(&backend, vec![Message::system("sys"), Message::user("q")]).unwrap();
        let roles: Vec<Role> = session.transcript().iter().map(|m| m.role).collect();
        assert_eq!(roles, vec![Role::System, Role::User, Role::Assistant]);
    }
}
