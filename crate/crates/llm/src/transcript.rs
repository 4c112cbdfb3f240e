use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::LlmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Derive,
    Generate,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Derive => "derive",
            Pipeline::Generate => "generate",
        }
    }

    pub fn phase_count(self) -> u32 {
        match self {
            Pipeline::Derive => 4,
            Pipeline::Generate => 6,
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub phase: u32,
    /// What the message is about when narrower than the conversation,
    /// e.g. the MR being converted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub pipeline: Pipeline,
    /// Document id for derive, MR catalog hash for generate.
    pub subject: String,
    pub client: String,
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<Message>,
}

impl Conversation {
    pub fn new(pipeline: Pipeline, subject: &str, client: &str, model: &str, temperature: f64) -> Self {
        Conversation {
            id: format!("{}-{}", pipeline.name(), &subject[..subject.len().min(16)]),
            pipeline,
            subject: subject.to_string(),
            client: client.to_string(),
            model: model.to_string(),
            temperature,
            messages: Vec::new(),
        }
    }

    /// Phases never go backwards, the first message is phase 1, and no
    /// phase exceeds the pipeline's count.
    pub fn check_phase_order(&self) -> Result<(), String> {
        let mut last = 0;
        for (i, m) in self.messages.iter().enumerate() {
            if i == 0 && m.phase != 1 {
                return Err(format!("conversation starts in phase {}", m.phase));
            }
            if m.phase < last {
                return Err(format!("message {i} goes back from phase {last} to {}", m.phase));
            }
            if m.phase > self.pipeline.phase_count() {
                return Err(format!("message {i} has phase {}", m.phase));
            }
            last = m.phase;
        }
        Ok(())
    }

    pub fn phases(&self) -> Vec<u32> {
        let mut p: Vec<u32> = self.messages.iter().map(|m| m.phase).collect();
        p.dedup();
        p
    }

    pub fn last_user(&self) -> Option<&Message> {
        self.messages.iter().rev().find(|m| m.role == Role::User)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("conversation serializes") + "\n"
    }
}

/// One JSON file per conversation, rewritten whole after each turn.
#[derive(Debug)]
pub struct TranscriptStore {
    dir: PathBuf,
    lock: Mutex<()>,
}

impl TranscriptStore {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| LlmError::io(&dir, e))?;
        Ok(TranscriptStore { dir, lock: Mutex::new(()) })
    }

    pub fn path_of(&self, conversation_id: &str) -> PathBuf {
        self.dir.join(format!("{conversation_id}.json"))
    }

    pub fn save(&self, conversation: &Conversation) -> Result<PathBuf, LlmError> {
        let _guard = self.lock.lock().unwrap_or_else(|p| p.into_inner());
        let path = self.path_of(&conversation.id);
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, conversation.to_json()).map_err(|e| LlmError::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| LlmError::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Conversation, LlmError> {
        let text = std::fs::read_to_string(path).map_err(|e| LlmError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| LlmError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}
