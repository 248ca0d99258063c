use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{check_request, estimate_tokens, CompletionRequest, CompletionResult, LlmClient, LlmError};

/// Endpoint settings for an OpenAI-compatible `/chat/completions` API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    /// Base URL up to and including the version segment, e.g.
    /// `http://localhost:11434/v1`.
    pub base_url: String,
    /// Environment variable holding the bearer token. Unset means no
    /// `Authorization` header, which suits local model servers.
    pub api_key_env: String,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub request_timeout_seconds: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            max_retries: 3,
            initial_backoff_ms: 500,
            max_backoff_ms: 8000,
            request_timeout_seconds: 300,
        }
    }
}

pub struct HttpClient {
    config: HttpConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

enum Attempt {
    Retry(String),
    Fatal(LlmError),
}

impl HttpClient {
    pub fn new(config: HttpConfig) -> Result<Self, LlmError> {
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        if api_key.is_none() {
            log::warn!("{} is not set; sending requests without credentials", config.api_key_env);
        }
        Self::with_api_key(config, api_key)
    }

    pub fn with_api_key(config: HttpConfig, api_key: Option<String>) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.request_timeout_seconds))
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(HttpClient { config, api_key, client })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64.checked_shl(attempt).unwrap_or(u64::MAX);
        Duration::from_millis(self.config.initial_backoff_ms.saturating_mul(factor).min(self.config.max_backoff_ms))
    }

    fn attempt(&self, body: &Value) -> Result<(String, Option<(u64, u64)>), Attempt> {
        let mut builder = self.client.post(self.endpoint()).json(body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| Attempt::Retry(format!("transport: {e}")))?;
        let status = response.status().as_u16();
        let text = response.text().map_err(|e| Attempt::Retry(format!("reading body: {e}")))?;
        match status {
            200..=299 => parse_payload(&text).map_err(Attempt::Fatal),
            401 | 403 => Err(Attempt::Fatal(LlmError::Auth { status, message: snippet(&text) })),
            429 | 500..=599 => Err(Attempt::Retry(format!("status {status}: {}", snippet(&text)))),
            _ => Err(Attempt::Fatal(LlmError::Rejected { status, message: snippet(&text) })),
        }
    }
}

fn snippet(text: &str) -> String {
    text.chars().take(300).collect()
}

fn parse_payload(text: &str) -> Result<(String, Option<(u64, u64)>), LlmError> {
    let v: Value = serde_json::from_str(text).map_err(|e| LlmError::MalformedPayload(e.to_string()))?;
    let content = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LlmError::MalformedPayload("missing choices[0].message.content".into()))?;
    let usage = match (
        v.pointer("/usage/prompt_tokens").and_then(Value::as_u64),
        v.pointer("/usage/completion_tokens").and_then(Value::as_u64),
    ) {
        (Some(i), Some(o)) => Some((i, o)),
        _ => None,
    };
    Ok((content.to_string(), usage))
}

impl LlmClient for HttpClient {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        check_request(request)?;
        let body = json!({
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });
        let started = Instant::now();
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(self.backoff(attempt - 1));
            }
            match self.attempt(&body) {
                Ok((text, usage)) => {
                    let (input_tokens, output_tokens, tokens_estimated) = match usage {
                        Some((i, o)) => (i, o, false),
                        None => (estimate_tokens(&request.prompt), estimate_tokens(&text), true),
                    };
                    return Ok(CompletionResult {
                        text,
                        input_tokens,
                        output_tokens,
                        latency_seconds: started.elapsed().as_secs_f64(),
                        tokens_estimated,
                    });
                }
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(reason)) => {
                    log::warn!("{}: attempt {} failed: {reason}", request.request_tag, attempt + 1);
                    last = reason;
                }
            }
        }
        Err(LlmError::RetriesExhausted { attempts: self.config.max_retries + 1, last })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};

    /// Serves one scripted (status, body) per connection and records the
    /// request bodies and authorization headers it saw.
    fn fake_server(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<(Option<String>, String)>>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        std::thread::spawn(move || {
            for (status, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut length = 0usize;
                let mut auth = None;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap();
                    }
                    if lower.starts_with("authorization:") {
                        auth = Some(line["authorization:".len()..].trim().to_string());
                    }
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                }
                let mut buf = vec![0; length];
                reader.read_exact(&mut buf).unwrap();
                log.lock().unwrap().push((auth, String::from_utf8(buf).unwrap()));
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        (url, seen)
    }

    fn client(url: &str, key: Option<&str>) -> HttpClient {
        let config = HttpConfig {
            base_url: url.into(),
            max_retries: 2,
            initial_backoff_ms: 1,
            max_backoff_ms: 4,
            ..HttpConfig::default()
        };
        HttpClient::with_api_key(config, key.map(String::from)).unwrap()
    }

    fn req() -> CompletionRequest {
        CompletionRequest {
            model: "qwen".into(),
            prompt: "hello there".into(),
            temperature: 0.7,
            max_output_tokens: 64,
            request_tag: "g0/I1/0".into(),
        }
    }

    const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"{x}"}}],"usage":{"prompt_tokens":11,"completion_tokens":3}}"#;

    #[test]
    fn success_reads_content_and_usage() {
        let (url, seen) = fake_server(vec![(200, OK.into())]);
        let r = client(&url, Some("secret")).complete(&req()).unwrap();
        assert_eq!(r.text, "{x}");
        assert_eq!((r.input_tokens, r.output_tokens, r.tokens_estimated), (11, 3, false));
        let seen = seen.lock().unwrap();
        assert_eq!(seen[0].0.as_deref(), Some("Bearer secret"));
        let body: Value = serde_json::from_str(&seen[0].1).unwrap();
        assert_eq!(body["model"], "qwen");
        assert_eq!(body["messages"][0]["content"], "hello there");
        assert_eq!(body["max_tokens"], 64);
    }

    #[test]
    fn retries_server_errors_then_succeeds() {
        let (url, seen) = fake_server(vec![(503, "busy".into()), (429, "slow".into()), (200, OK.into())]);
        assert_eq!(client(&url, None).complete(&req()).unwrap().text, "{x}");
        let seen = seen.lock().unwrap();
        assert_eq!(seen.len(), 3);
        assert_eq!(seen[0].0, None);
    }

    #[test]
    fn exhausted_retries() {
        let (url, _) = fake_server(vec![(500, "a".into()), (500, "b".into()), (502, "c".into())]);
        match client(&url, None).complete(&req()).unwrap_err() {
            LlmError::RetriesExhausted { attempts, last } => {
                assert_eq!(attempts, 3);
                assert!(last.contains("502"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn auth_and_payload_errors_are_not_retried() {
        let (url, seen) = fake_server(vec![(401, "no".into())]);
        assert!(matches!(client(&url, None).complete(&req()), Err(LlmError::Auth { status: 401, .. })));
        assert_eq!(seen.lock().unwrap().len(), 1);
        let (url, _) = fake_server(vec![(200, r#"{"choices":[]}"#.into())]);
        assert!(matches!(client(&url, None).complete(&req()), Err(LlmError::MalformedPayload(_))));
        let (url, _) = fake_server(vec![(400, "bad".into())]);
        assert!(matches!(client(&url, None).complete(&req()), Err(LlmError::Rejected { status: 400, .. })));
    }

    #[test]
    fn missing_usage_falls_back_to_estimate() {
        let (url, _) = fake_server(vec![(200, r#"{"choices":[{"message":{"content":"abcdefgh"}}]}"#.into())]);
        let r = client(&url, None).complete(&req()).unwrap();
        assert_eq!((r.input_tokens, r.output_tokens, r.tokens_estimated), (3, 2, true));
    }

    #[test]
    fn unreachable_endpoint_is_a_transport_failure() {
        let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let url = format!("http://127.0.0.1:{port}/v1");
        match client(&url, None).complete(&req()).unwrap_err() {
            LlmError::RetriesExhausted { last, .. } => assert!(last.starts_with("transport")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn backoff_grows_and_caps() {
        let c = HttpClient::with_api_key(HttpConfig::default(), None).unwrap();
        assert_eq!(c.backoff(0), Duration::from_millis(500));
        assert_eq!(c.backoff(2), Duration::from_millis(2000));
        assert_eq!(c.backoff(10), Duration::from_millis(8000));
        assert_eq!(c.backoff(80), Duration::from_millis(8000));
    }
}
