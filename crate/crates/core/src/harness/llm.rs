//! Chat-completion client with bounded retries.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use tracing::{info, warn};

use super::{HarnessError, PromptBundle};

/// Environment variable holding the bearer credential.
pub const API_KEY_ENV: &str = "LLM_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    /// Base URL; `/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// Per-request deadline in seconds.
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000/v1".into(),
            model: "gpt-4".into(),
            temperature: None,
            timeout_secs: 60.0,
            max_retries: 3,
            backoff_ms: 500,
            api_key: None,
        }
    }
}

impl LlmConfig {
    pub fn with_env_key(mut self) -> Self {
        self.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        self
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub attempts: u32,
}

enum Attempt {
    Done(Result<String, HarnessError>),
    Retry(HarnessError),
}

/// Sends system and user messages and returns the first choice's content.
///
/// Transport failures, 429 and 5xx responses are retried up to
/// `max_retries` times with doubling back-off.
pub fn llm_complete(bundle: &PromptBundle, cfg: &LlmConfig) -> Result<Completion, HarnessError> {
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs_f64(cfg.timeout_secs))
        .build()
        .map_err(|e| HarnessError::Transport(e.to_string()))?;
    let mut body = json!({
        "model": cfg.model,
        "messages": [
            {"role": "system", "content": bundle.system_text},
            {"role": "user", "content": bundle.user_text},
        ],
    });
    if let Some(t) = cfg.temperature {
        body["temperature"] = json!(t);
    }
    let mut attempts = 0;
    loop {
        attempts += 1;
        let outcome = attempt(&client, cfg, &body);
        match outcome {
            Attempt::Done(r) => {
                info!(attempts, "completion finished");
                return r.map(|text| Completion { text, attempts });
            }
            Attempt::Retry(e) if attempts > cfg.max_retries => return Err(e),
            Attempt::Retry(e) => {
                let wait = cfg.backoff_ms.saturating_mul(1 << (attempts - 1).min(16));
                warn!(attempt = attempts, error = %e, wait_ms = wait, "retrying completion");
                std::thread::sleep(Duration::from_millis(wait));
            }
        }
    }
}

fn attempt(client: &reqwest::blocking::Client, cfg: &LlmConfig, body: &serde_json::Value) -> Attempt {
    let mut req = client.post(cfg.endpoint()).json(body);
    if let Some(key) = &cfg.api_key {
        req = req.bearer_auth(key);
    }
    let resp = match req.send() {
        Ok(r) => r,
        Err(e) if e.is_timeout() || e.is_connect() => return Attempt::Retry(HarnessError::Timeout(e.to_string())),
        Err(e) => return Attempt::Retry(HarnessError::Transport(e.to_string())),
    };
    let status = resp.status();
    if status.is_server_error() || status.as_u16() == 429 {
        return Attempt::Retry(HarnessError::HttpError(status.as_u16()));
    }
    if !status.is_success() {
        return Attempt::Done(Err(HarnessError::HttpError(status.as_u16())));
    }
    let value: serde_json::Value = match resp.json() {
        Ok(v) => v,
        Err(e) if e.is_timeout() => return Attempt::Retry(HarnessError::Timeout(e.to_string())),
        Err(_) => return Attempt::Done(Err(HarnessError::EmptyCompletion)),
    };
    let text = value
        .pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .filter(|c| !c.trim().is_empty())
        .map(str::to_string);
    Attempt::Done(text.ok_or(HarnessError::EmptyCompletion))
}
