use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{check_request, estimate_tokens, prompt_sha256, CompletionRequest, CompletionResult, LlmClient, LlmError};

/// One recorded exchange in a replay fixture file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub prompt_sha256: String,
    pub response_text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// Answers prompts from a fixture keyed by prompt hash.
///
/// When the same prompt was recorded several times the entries are served
/// in file order; once they run out the last one is repeated.
#[derive(Debug)]
pub struct ReplayClient {
    entries: HashMap<String, Vec<ReplayEntry>>,
    served: Mutex<HashMap<String, usize>>,
}

impl ReplayClient {
    pub fn new(entries: Vec<ReplayEntry>) -> Self {
        let mut map: HashMap<String, Vec<ReplayEntry>> = HashMap::new();
        for e in entries {
            map.entry(e.prompt_sha256.clone()).or_default().push(e);
        }
        ReplayClient { entries: map, served: Mutex::new(HashMap::new()) }
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path).map_err(|e| LlmError::Fixture(format!("{}: {e}", path.display())))?;
        let entries: Vec<ReplayEntry> =
            serde_json::from_str(&text).map_err(|e| LlmError::Fixture(format!("{}: {e}", path.display())))?;
        Ok(Self::new(entries))
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl LlmClient for ReplayClient {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        check_request(request)?;
        let key = prompt_sha256(&request.prompt);
        let list = self.entries.get(&key).ok_or_else(|| LlmError::MissingFixture { prompt_sha256: key.clone() })?;
        let index = {
            let mut served = self.served.lock().expect("replay cursor lock");
            let slot = served.entry(key).or_insert(0);
            let i = (*slot).min(list.len() - 1);
            *slot += 1;
            i
        };
        let e = &list[index];
        Ok(CompletionResult {
            text: e.response_text.clone(),
            input_tokens: e.input_tokens,
            output_tokens: e.output_tokens,
            latency_seconds: 0.0,
            tokens_estimated: false,
        })
    }
}

type Script = dyn Fn(&CompletionRequest, u64) -> String + Send + Sync;

/// Produces answers from a closure given the request and a running call
/// number. Token counts are estimates.
pub struct ScriptedClient {
    script: Box<Script>,
    calls: Mutex<u64>,
}

impl ScriptedClient {
    pub fn new(script: impl Fn(&CompletionRequest, u64) -> String + Send + Sync + 'static) -> Self {
        ScriptedClient { script: Box::new(script), calls: Mutex::new(0) }
    }
}

impl LlmClient for ScriptedClient {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        check_request(request)?;
        let call = {
            let mut calls = self.calls.lock().expect("call counter lock");
            *calls += 1;
            *calls - 1
        };
        let text = (self.script)(request, call);
        Ok(CompletionResult {
            input_tokens: estimate_tokens(&request.prompt),
            output_tokens: estimate_tokens(&text),
            text,
            latency_seconds: 0.0,
            tokens_estimated: true,
        })
    }
}

/// Passes calls through and keeps every exchange as a [`ReplayEntry`].
pub struct RecordingClient<C> {
    inner: C,
    log: Mutex<Vec<ReplayEntry>>,
}

impl<C: LlmClient> RecordingClient<C> {
    pub fn new(inner: C) -> Self {
        RecordingClient { inner, log: Mutex::new(Vec::new()) }
    }

    pub fn entries(&self) -> Vec<ReplayEntry> {
        self.log.lock().expect("recording lock").clone()
    }

    pub fn write_fixture(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(&self.entries()).expect("entries serialize");
        text.push('\n');
        std::fs::write(path, text)
    }
}

impl<C: LlmClient> LlmClient for RecordingClient<C> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        let result = self.inner.complete(request)?;
        self.log.lock().expect("recording lock").push(ReplayEntry {
            prompt_sha256: prompt_sha256(&request.prompt),
            response_text: result.text.clone(),
            input_tokens: result.input_tokens,
            output_tokens: result.output_tokens,
        });
        Ok(result)
    }
}
