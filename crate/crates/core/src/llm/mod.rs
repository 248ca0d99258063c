//! Chat-completion access: a replay client for offline runs, an HTTP
//! client for OpenAI-compatible endpoints, and token usage accounting.

mod http;
mod replay;
mod usage;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use http::{HttpClient, HttpConfig};
pub use replay::{RecordingClient, ReplayClient, ReplayEntry, ScriptedClient};
pub use usage::{usage_report, UsageRow, UsageSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    /// Free-form label such as `g3/E1/17`, carried into logs.
    pub request_tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub latency_seconds: f64,
    /// True when the provider sent no usage block and the counts come from
    /// [`estimate_tokens`].
    pub tokens_estimated: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("MISSING_FIXTURE: no recorded response for prompt {prompt_sha256}")]
    MissingFixture { prompt_sha256: String },
    #[error("replay fixture: {0}")]
    Fixture(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("authentication failed ({status}): {message}")]
    Auth { status: u16, message: String },
    #[error("provider rejected request ({status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("malformed provider payload: {0}")]
    MalformedPayload(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("configuration: {0}")]
    Config(String),
}

pub trait LlmClient: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError>;
}

impl<C: LlmClient + ?Sized> LlmClient for Box<C> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        (**self).complete(request)
    }
}

impl<C: LlmClient + ?Sized> LlmClient for std::sync::Arc<C> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        (**self).complete(request)
    }
}

/// Hex SHA-256 of the exact prompt text; the replay key.
pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Fallback token count: one token per four characters, rounded up.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

pub(crate) fn check_request(request: &CompletionRequest) -> Result<(), LlmError> {
    if request.prompt.is_empty() {
        return Err(LlmError::InvalidRequest("prompt is empty".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashing_and_estimates() {
        assert_eq!(prompt_sha256("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("abcde"), 2);
        assert_eq!(estimate_tokens("abcd"), 1);
    }
}
