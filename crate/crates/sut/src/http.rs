//! Live adapter: one HTTP request per action.
//!
//! The adapter config (TOML) maps each action kind to a method and path:
//!
//! ```toml
//! base_url = "http://127.0.0.1:8080"
//! timeout_ms = 5000
//!
//! [endpoints.search]
//! method = "GET"      # parameters go into the query string
//! path = "/api/search"
//!
//! [endpoints.add_to_cart]
//! method = "POST"     # parameters go into a JSON body
//! path = "/api/cart"
//! ```
//!
//! A JSON response body becomes the output payload; its `status` field,
//! when it is a string, becomes the output status, otherwise the HTTP
//! status code does.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::action::{Action, Output};
use crate::session::{Backend, Session, SessionFactory, SessionIds};
use crate::SutError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Get,
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoint {
    pub method: Method,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterConfig {
    pub base_url: String,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    /// Whether the server keeps no state between sessions.
    #[serde(default)]
    pub isolated: bool,
    pub endpoints: BTreeMap<String, Endpoint>,
}

fn default_timeout() -> u64 {
    10_000
}

impl AdapterConfig {
    pub fn from_toml(text: &str) -> Result<Self, SutError> {
        toml::from_str(text).map_err(|e| SutError::Config(format!("adapter config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, SutError> {
        let text = std::fs::read_to_string(path).map_err(|e| SutError::io(path, e))?;
        AdapterConfig::from_toml(&text)
    }
}

pub struct HttpSut {
    config: AdapterConfig,
    ids: SessionIds,
}

impl HttpSut {
    pub fn new(config: AdapterConfig) -> Self {
        HttpSut {
            config,
            ids: SessionIds::default(),
        }
    }
}

impl SessionFactory for HttpSut {
    fn open(&self) -> Result<Session, SutError> {
        let client = Client::builder()
            .timeout(Duration::from_millis(self.config.timeout_ms))
            .build()
            .map_err(|e| SutError::Transport(e.to_string()))?;
        Ok(Session::new(
            self.ids.next("http"),
            Box::new(HttpBackend {
                client,
                config: self.config.clone(),
            }),
        ))
    }

    fn isolated(&self) -> bool {
        self.config.isolated
    }

    fn describe(&self) -> String {
        format!("HTTP adapter for {}", self.config.base_url)
    }
}

struct HttpBackend {
    client: Client,
    config: AdapterConfig,
}

fn query_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Backend for HttpBackend {
    fn execute(&mut self, action: &Action) -> Result<Output, SutError> {
        let endpoint = self
            .config
            .endpoints
            .get(&action.kind)
            .ok_or_else(|| SutError::UnknownAction(action.kind.clone()))?;
        let url = format!(
            "{}/{}",
            self.config.base_url.trim_end_matches('/'),
            endpoint.path.trim_start_matches('/')
        );
        let request = match endpoint.method {
            Method::Get => {
                let query: Vec<(&str, String)> = action
                    .parameters
                    .iter()
                    .map(|(k, v)| (k.as_str(), query_value(v)))
                    .collect();
                self.client.get(&url).query(&query)
            }
            Method::Post => self.client.post(&url).json(&action.parameters),
        };
        let response = request
            .send()
            .map_err(|e| SutError::Transport(format!("{} {url}: {e}", action.kind)))?;
        let code = response.status().as_u16();
        let body = response
            .text()
            .map_err(|e| SutError::Transport(format!("{} {url}: {e}", action.kind)))?;
        let payload = serde_json::from_str(&body).unwrap_or(Value::String(body));
        let mut out = Output::ok(payload);
        out.status = match out.payload.get("status").and_then(Value::as_str) {
            Some(s) => s.to_string(),
            None => code.to_string(),
        };
        Ok(out)
    }
}
