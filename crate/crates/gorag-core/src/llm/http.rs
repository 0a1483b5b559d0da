//! Chat-completion HTTP backend.
//!
//! Speaks the common chat-completion wire shape: POST to the configured
//! endpoint with `{model, messages, temperature, max_tokens}`, reply read
//! from `choices[0].message.content`. The API key comes from `GORAG_API_KEY`
//! (fallback `OPENAI_API_KEY`); requests go out with `Authorization: Bearer`
//! only when a key is present, so local servers work without one.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::LlmError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    /// Full URL of the chat-completion route, e.g.
    /// `http://localhost:8000/v1/chat/completions`.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_ms: u64,
    /// Extra attempts after the first; transport errors and 5xx retry with
    /// exponential backoff, 4xx fail immediately.
    pub retries: u32,
    /// Upper bound on concurrent in-flight requests during parallel
    /// extraction phases.
    pub concurrency: usize,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: "http://localhost:8000/v1/chat/completions".into(),
            model: "model".into(),
            temperature: 0.0,
            max_tokens: 256,
            timeout_ms: 30_000,
            retries: 2,
            concurrency: 4,
        }
    }
}

pub const SYSTEM_PREAMBLE: &str =
    "You are a precise text analysis assistant. Follow the instructions exactly.";

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Serialize)]
pub struct ChatRequest<'a> {
    pub model: &'a str,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

/// The exact request body sent for a prompt; exposed so tests can pin the
/// wire format against golden bytes.
pub fn request_body(config: &HttpConfig, prompt: &str) -> String {
    let req = ChatRequest {
        model: &config.model,
        messages: vec![
            ChatMessage {
                role: "system".into(),
                content: SYSTEM_PREAMBLE.into(),
            },
            ChatMessage {
                role: "user".into(),
                content: prompt.into(),
            },
        ],
        temperature: config.temperature,
        max_tokens: Some(config.max_tokens),
    };
    serde_json::to_string(&req).expect("chat request serializes")
}

#[derive(Debug)]
pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let api_key = std::env::var("GORAG_API_KEY")
            .or_else(|_| std::env::var("OPENAI_API_KEY"))
            .ok();
        Ok(HttpBackend {
            config,
            client,
            api_key,
        })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    pub fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let body = request_body(&self.config, prompt);
        let attempts = self.config.retries + 1;
        let mut last_err = LlmError::Transport("no attempt made".into());
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200u64 << (attempt - 1).min(4)));
            }
            let mut req = self
                .client
                .post(&self.config.endpoint)
                .header(reqwest::header::CONTENT_TYPE, "application/json")
                .body(body.clone());
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            match req.send() {
                Err(e) => last_err = LlmError::Transport(e.to_string()),
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let parsed: ChatResponse = resp
                            .json()
                            .map_err(|e| LlmError::BadReply(e.to_string()))?;
                        let content = parsed
                            .choices
                            .first()
                            .and_then(|c| c.message.content.clone())
                            .ok_or_else(|| LlmError::BadReply("reply carries no content".into()))?;
                        return Ok(content);
                    }
                    let text = resp.text().unwrap_or_default();
                    let err = LlmError::Status {
                        status: status.as_u16(),
                        body: text.chars().take(400).collect(),
                    };
                    if status.is_server_error() {
                        last_err = err;
                    } else {
                        return Err(err);
                    }
                }
            }
        }
        Err(last_err)
    }
}
