//! Chat-completion backend for live models.
//!
//! Speaks the common `POST <base>/chat/completions` shape: messages in,
//! one choice out, optional tool calls with JSON-encoded argument strings.
//! Transient failures (connect errors, HTTP 429 and 5xx) are retried with
//! exponential backoff; anything else fails fast as a protocol error.

use std::time::Duration;

use serde::Deserialize;

use super::session::{AgentBackend, CompletionRequest, RawToolCall, RawTurn, Usage};
use super::AgentError;

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    /// Attempts per request, counting the first one.
    pub max_attempts: u32,
    /// Backoff before attempt n is `backoff_ms << (n - 2)`.
    pub backoff_ms: u64,
    pub timeout: Duration,
}

impl HttpBackendConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpBackendConfig {
            base_url: base_url.into(),
            api_key: None,
            max_attempts: 3,
            backoff_ms: 250,
            timeout: Duration::from_secs(120),
        }
    }
}

pub struct HttpBackend {
    config: HttpBackendConfig,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
    #[serde(default)]
    tool_calls: Vec<WireToolCall>,
}

#[derive(Deserialize)]
struct WireToolCall {
    function: WireFunction,
}

#[derive(Deserialize)]
struct WireFunction {
    name: String,
    /// JSON object encoded as a string, per the usual wire convention.
    arguments: String,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Result<Self, AgentError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| AgentError::Transport { detail: e.to_string() })?;
        Ok(HttpBackend { config, client })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn try_once(&self, request: &CompletionRequest) -> Result<RawTurn, Transient> {
        let body = serde_json::json!({
            "model": request.model_ref,
            "messages": request.messages,
        });
        let mut req = self.client.post(self.endpoint()).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let response = req.send().map_err(|e| Transient::Retry(e.to_string()))?;
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(Transient::Retry(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(Transient::Fatal(AgentError::Transport {
                detail: format!("HTTP {status} from {}", self.endpoint()),
            }));
        }
        let wire: WireResponse = response
            .json()
            .map_err(|e| Transient::Fatal(AgentError::Protocol { detail: e.to_string() }))?;
        decode_turn(wire).map_err(Transient::Fatal)
    }
}

enum Transient {
    Retry(String),
    Fatal(AgentError),
}

fn decode_turn(wire: WireResponse) -> Result<RawTurn, AgentError> {
    let choice = wire
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| AgentError::Protocol { detail: "response has no choices".into() })?;
    let mut tool_calls = Vec::with_capacity(choice.message.tool_calls.len());
    for call in choice.message.tool_calls {
        let arguments = serde_json::from_str(&call.function.arguments).map_err(|e| {
            AgentError::Protocol {
                detail: format!("tool {} arguments are not valid JSON: {e}", call.function.name),
            }
        })?;
        tool_calls.push(RawToolCall { name: call.function.name, arguments });
    }
    let usage = wire
        .usage
        .map(|u| Usage { prompt_tokens: u.prompt_tokens, completion_tokens: u.completion_tokens })
        .unwrap_or_default();
    Ok(RawTurn { text: choice.message.content.unwrap_or_default(), tool_calls, usage })
}

impl AgentBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<RawTurn, AgentError> {
        let mut last_detail = String::new();
        for attempt in 1..=self.config.max_attempts {
            if attempt > 1 {
                let delay = self.config.backoff_ms << (attempt - 2);
                std::thread::sleep(Duration::from_millis(delay));
            }
            match self.try_once(request) {
                Ok(turn) => return Ok(turn),
                Err(Transient::Fatal(err)) => return Err(err),
                Err(Transient::Retry(detail)) => last_detail = detail,
            }
        }
        Err(AgentError::Transport {
            detail: format!(
                "giving up after {} attempts, last failure: {last_detail}",
                self.config.max_attempts
            ),
        })
    }
}
