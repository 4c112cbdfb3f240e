//! Staged LLM conversations.
//!
//! Two pipelines share one chat driver: [`derive_mrs`] reads a requirements
//! document and returns metamorphic relations in natural language, and
//! [`generate_emrs`] teaches the model SMRL and converts each relation into
//! an executable EMR, repairing and parsing what comes back. Every turn is
//! written to the transcript store before the next one starts.

pub mod client;
pub mod config;
pub mod derive;
pub mod document;
pub mod fewshot;
pub mod generate;
pub mod live;
pub mod templates;
pub mod transcript;

use std::path::PathBuf;

use thiserror::Error;

pub use client::{chat, ChatClient, MockClient, ScriptEntry};
pub use config::{LlmConfig, Staging};
pub use derive::{derive_mrs, merge_mrs, parse_mr_list, parse_sentences, DeriveOutcome, FlaggedSentence, MetamorphicRelation};
pub use document::{chunk_document, document_id, ingest_document, normalize_text, Document};
pub use fewshot::{builtin_fewshot, load_fewshot, FewShotExample};
pub use generate::{
    catalog_hash, extract_emr_source, generate_emrs, process_reply, render_apis, render_constructs, render_fewshot, EmrStatus, GenerateOutcome,
    GeneratedEmr,
};
pub use live::LiveClient;
pub use templates::{render, PromptPhase, Templates};
pub use transcript::{Conversation, Message, Pipeline, Role, TranscriptStore};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: unsupported format: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },
    #[error("the document is empty")]
    EmptyDocument,
    #[error("LLM transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("no mock script for {pipeline} phase {phase} (subject {subject}, content sha256 {content_sha256})")]
    MissingScript {
        pipeline: Pipeline,
        phase: u32,
        subject: String,
        content_sha256: String,
    },
    #[error("phase {phase} response is not in the required format: {message}")]
    ResponseFormat { phase: u32, message: String },
    #[error("template {name}: {message}")]
    Template { name: String, message: String },
    #[error("few-shot example {name}: {message}")]
    FewShot { name: String, message: String },
    #[error("mock scripts: {0}")]
    Scripts(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("single-shot derivation is not supported; the conversation must be staged")]
    SingleShotRefused,
}

impl LlmError {
    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        LlmError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    /// True for failures of the model connection (as opposed to bad input).
    pub fn is_transport(&self) -> bool {
        matches!(self, LlmError::Transport { .. } | LlmError::MissingScript { .. })
    }
}

pub(crate) fn sha256_hex(data: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(data))
}
