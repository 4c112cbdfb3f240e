use std::time::Duration;

use serde_json::{json, Value};

use crate::client::ChatClient;
use crate::config::LlmConfig;
use crate::transcript::Conversation;
use crate::LlmError;

/// OpenAI-style chat-completions client.
pub struct LiveClient {
    config: LlmConfig,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

impl LiveClient {
    pub fn new(config: &LlmConfig) -> Result<Self, LlmError> {
        config.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(LiveClient {
            config: config.clone(),
            api_key: std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty()),
            http,
        })
    }

    fn body(&self, conversation: &Conversation) -> Value {
        let messages: Vec<Value> = conversation
            .messages
            .iter()
            .map(|m| json!({"role": m.role.name(), "content": m.content}))
            .collect();
        json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
            "messages": messages,
        })
    }
}

enum Attempt {
    Retry(String),
    Fatal(String),
}

impl LiveClient {
    fn attempt(&self, body: &Value) -> Result<String, Attempt> {
        let mut req = self.http.post(&self.config.endpoint).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Attempt::Retry(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Attempt::Retry(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(Attempt::Retry(format!("HTTP {status}: {}", snippet(&text))));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(format!("HTTP {status}: {}", snippet(&text))));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| Attempt::Fatal(format!("bad JSON reply: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| Attempt::Fatal("reply has no choices[0].message.content".into()))
    }
}

fn snippet(text: &str) -> String {
    text.chars().take(200).collect()
}

impl ChatClient for LiveClient {
    fn complete(&mut self, conversation: &Conversation) -> Result<String, LlmError> {
        let body = self.body(conversation);
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body) {
                Ok(reply) => return Ok(reply),
                Err(Attempt::Fatal(message)) => return Err(LlmError::Transport { attempts, message }),
                Err(Attempt::Retry(message)) => {
                    if attempts > self.config.max_retries {
                        return Err(LlmError::Transport { attempts, message });
                    }
                    let wait = self.config.backoff_ms.saturating_mul(1 << (attempts - 1).min(16));
                    std::thread::sleep(Duration::from_millis(wait));
                }
            }
        }
    }

    fn describe(&self) -> String {
        format!("live:{}", self.config.endpoint)
    }
}
