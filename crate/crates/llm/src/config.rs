use serde::{Deserialize, Serialize};

use crate::LlmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Staging {
    #[default]
    Staged,
    /// One monolithic query. Accepted in config files so the refusal is explicit.
    SingleShot,
}

/// Model connection and pipeline knobs. Every field has a default, and
/// [`LlmConfig::resolved`] shows them all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmConfig {
    /// Chat-completions URL.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub timeout_ms: u64,
    /// Largest document part sent in one turn, in characters.
    pub chunk_chars: usize,
    /// Upper bound on MRs requested per document; none means unbounded.
    pub mrs_per_document: Option<u32>,
    /// Drop MRs whose text repeats an earlier one when merging documents.
    pub dedupe_mrs: bool,
    pub staging: Staging,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4".into(),
            temperature: 0.0,
            max_tokens: 2048,
            api_key_env: "EMRKIT_API_KEY".into(),
            max_retries: 3,
            backoff_ms: 500,
            timeout_ms: 60_000,
            chunk_chars: 12_000,
            mrs_per_document: None,
            dedupe_mrs: true,
            staging: Staging::Staged,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.staging == Staging::SingleShot {
            return Err(LlmError::SingleShotRefused);
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::Config(format!("temperature {} is outside 0..=2", self.temperature)));
        }
        if self.chunk_chars < 1000 {
            return Err(LlmError::Config("chunk_chars must be at least 1000".into()));
        }
        Ok(())
    }
}
