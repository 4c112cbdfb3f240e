use serde::{Deserialize, Serialize};

use crate::transcript::{Conversation, Message, Pipeline, Role, TranscriptStore};
use crate::{sha256_hex, LlmError};

/// A chat model. `complete` sees the whole conversation, whose last message
/// is the pending user turn, and returns the assistant's reply.
pub trait ChatClient: Send {
    fn complete(&mut self, conversation: &Conversation) -> Result<String, LlmError>;

    /// Short label stored in transcripts.
    fn describe(&self) -> String;
}

/// Appends a user turn, persists, asks the model, appends and persists the
/// reply. A failure loses at most the unanswered turn.
pub fn chat(
    client: &mut dyn ChatClient,
    conversation: &mut Conversation,
    store: Option<&TranscriptStore>,
    phase: u32,
    subject: Option<&str>,
    content: String,
) -> Result<String, LlmError> {
    conversation.messages.push(Message {
        role: Role::User,
        phase,
        subject: subject.map(str::to_string),
        content,
    });
    if let Some(s) = store {
        s.save(conversation)?;
    }
    let reply = client.complete(conversation)?;
    conversation.messages.push(Message {
        role: Role::Assistant,
        phase,
        subject: subject.map(str::to_string),
        content: reply.clone(),
    });
    if let Some(s) = store {
        s.save(conversation)?;
    }
    Ok(reply)
}

/// One canned reply. More specific keys win: a content hash beats a
/// subject, which beats a wildcard for the phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    pub pipeline: Pipeline,
    pub phase: u32,
    /// SHA-256 of the user message this entry answers.
    #[serde(default)]
    pub content_sha256: Option<String>,
    #[serde(default)]
    pub subject: Option<String>,
    pub response: String,
}

/// Replays scripted replies; never touches the network.
#[derive(Debug, Clone, Default)]
pub struct MockClient {
    scripts: Vec<ScriptEntry>,
    /// Number of replies served so far.
    pub calls: usize,
}

impl MockClient {
    pub fn new(scripts: Vec<ScriptEntry>) -> Self {
        MockClient { scripts, calls: 0 }
    }

    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        let scripts: Vec<ScriptEntry> = serde_json::from_str(text).map_err(|e| LlmError::Scripts(e.to_string()))?;
        for s in &scripts {
            if s.phase == 0 || s.phase > s.pipeline.phase_count() {
                return Err(LlmError::Scripts(format!("{} has no phase {}", s.pipeline, s.phase)));
            }
        }
        Ok(MockClient::new(scripts))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path).map_err(|e| LlmError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            LlmError::Scripts(m) => LlmError::Scripts(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn lookup(&self, pipeline: Pipeline, message: &Message) -> Result<&ScriptEntry, LlmError> {
        let hash = sha256_hex(message.content.as_bytes());
        let candidates = || {
            self.scripts
                .iter()
                .filter(move |s| s.pipeline == pipeline && s.phase == message.phase)
        };
        candidates()
            .find(|s| s.content_sha256.as_deref() == Some(hash.as_str()))
            .or_else(|| {
                candidates().find(|s| {
                    s.content_sha256.is_none() && s.subject.is_some() && s.subject == message.subject
                })
            })
            .or_else(|| candidates().find(|s| s.content_sha256.is_none() && s.subject.is_none()))
            .ok_or_else(|| LlmError::MissingScript {
                pipeline,
                phase: message.phase,
                subject: message.subject.clone().unwrap_or_else(|| "-".into()),
                content_sha256: hash,
            })
    }
}

impl ChatClient for MockClient {
    fn complete(&mut self, conversation: &Conversation) -> Result<String, LlmError> {
        let message = conversation
            .last_user()
            .ok_or_else(|| LlmError::Scripts("conversation has no user message".into()))?;
        let reply = self.lookup(conversation.pipeline, message)?.response.clone();
        self.calls += 1;
        Ok(reply)
    }

    fn describe(&self) -> String {
        "mock".into()
    }
}
