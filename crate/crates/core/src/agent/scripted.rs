//! Deterministic backend replaying canned turns from a fixture file.
//!
//! A `.turns` fixture is JSONL: one [`FixtureTurn`] per line, replayed in
//! order regardless of request content. Requests are recorded so tests can
//! assert on what the harness actually sent.

use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::record::read_jsonl;

use super::session::{AgentBackend, CompletionRequest, RawToolCall, RawTurn, Usage};
use super::AgentError;

/// One scripted assistant turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureTurn {
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub tool_calls: Vec<RawToolCall>,
    #[serde(default)]
    pub usage: Usage,
}

pub struct ScriptedBackend {
    name: String,
    turns: Vec<FixtureTurn>,
    cursor: Mutex<usize>,
    requests: Mutex<Vec<CompletionRequest>>,
}

impl ScriptedBackend {
    pub fn new(name: impl Into<String>, turns: Vec<FixtureTurn>) -> Self {
        ScriptedBackend {
            name: name.into(),
            turns,
            cursor: Mutex::new(0),
            requests: Mutex::new(Vec::new()),
        }
    }

    /// Loads a `.turns` fixture. The file name becomes the backend name
    /// used in exhaustion errors.
    pub fn from_file(path: &Path) -> Result<Self, AgentError> {
        let turns: Vec<FixtureTurn> = read_jsonl(path)?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(ScriptedBackend::new(name, turns))
    }

    /// Requests seen so far, in call order.
    pub fn requests_seen(&self) -> Vec<CompletionRequest> {
        self.requests.lock().unwrap().clone()
    }

    pub fn turns_remaining(&self) -> usize {
        self.turns.len() - *self.cursor.lock().unwrap()
    }
}

impl AgentBackend for ScriptedBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<RawTurn, AgentError> {
        let mut cursor = self.cursor.lock().unwrap();
        if *cursor >= self.turns.len() {
            return Err(AgentError::FixtureExhausted {
                name: self.name.clone(),
                turns: self.turns.len(),
            });
        }
        self.requests.lock().unwrap().push(request.clone());
        let turn = &self.turns[*cursor];
        *cursor += 1;
        Ok(RawTurn {
            text: turn.text.clone(),
            tool_calls: turn.tool_calls.clone(),
            usage: turn.usage,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::session::Message;
    use crate::record::JsonlWriter;

    fn turn(text: &str) -> FixtureTurn {
        FixtureTurn {
            text: text.into(),
            tool_calls: vec![],
            usage: Usage { prompt_tokens: 1, completion_tokens: 2 },
        }
    }

    fn request(content: &str) -> CompletionRequest {
        CompletionRequest { model_ref: "m".into(), messages: vec![Message::user(content)] }
    }

    #[test]
    fn replays_turns_in_order_then_exhausts() {
        let backend = ScriptedBackend::new("fx", vec![turn("one"), turn("two")]);
        assert_eq!(backend.complete(&request("a")).unwrap().text, "one");
        assert_eq!(backend.complete(&request("b")).unwrap().text, "two");
        let err = backend.complete(&request("c")).unwrap_err();
        assert!(matches!(err, AgentError::FixtureExhausted { turns: 2, .. }));
        assert_eq!(backend.requests_seen().len(), 2);
    }

    #[test]
    fn loads_turns_fixture_from_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.turns");
        let mut w = JsonlWriter::open(&path).unwrap();
        w.append(&turn("scripted")).unwrap();
        w.append(&FixtureTurn {
            text: String::new(),
            tool_calls: vec![RawToolCall {
                name: "finish".into(),
                arguments: serde_json::json!({}),
            }],
            usage: Usage::default(),
        })
        .unwrap();
        let backend = ScriptedBackend::from_file(&path).unwrap();
        assert_eq!(backend.turns_remaining(), 2);
        assert_eq!(backend.complete(&request("x")).unwrap().text, "scripted");
        let second = backend.complete(&request("y")).unwrap();
        assert_eq!(second.tool_calls[0].name, "finish");
    }
}
