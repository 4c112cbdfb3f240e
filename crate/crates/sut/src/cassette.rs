//! Record/replay of SUT traffic.
//!
//! A cassette is a JSON list of `{fingerprint, output}` entries in
//! execution order across all sessions. Replay hands entries out strictly
//! in that order.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::action::{Action, Output};
use crate::session::{Backend, Session, SessionFactory, SessionIds};
use crate::SutError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CassetteEntry {
    pub fingerprint: String,
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cassette {
    pub entries: Vec<CassetteEntry>,
}

impl Cassette {
    pub fn from_json(text: &str) -> Result<Self, SutError> {
        serde_json::from_str(text).map_err(|e| SutError::Schema(format!("cassette: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cassette serializes")
    }

    pub fn load(path: &Path) -> Result<Self, SutError> {
        let text = fs::read_to_string(path).map_err(|e| SutError::io(path, e))?;
        Cassette::from_json(&text)
    }

    /// Writes through a sibling temp file so readers never see a torn file.
    pub fn save(&self, path: &Path) -> Result<(), SutError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_json() + "\n").map_err(|e| SutError::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| SutError::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CassetteMode {
    Record,
    Replay,
}

/// Wraps another factory and persists every executed action's output.
pub struct RecordingFactory {
    inner: Arc<dyn SessionFactory>,
    path: PathBuf,
    cassette: Arc<Mutex<Cassette>>,
    ids: SessionIds,
}

impl RecordingFactory {
    /// Starts a new, empty cassette at `path`.
    pub fn new(inner: Arc<dyn SessionFactory>, path: impl Into<PathBuf>) -> Result<Self, SutError> {
        let path = path.into();
        let cassette = Cassette::default();
        cassette.save(&path)?;
        Ok(RecordingFactory {
            inner,
            path,
            cassette: Arc::new(Mutex::new(cassette)),
            ids: SessionIds::default(),
        })
    }

    pub fn cassette(&self) -> Cassette {
        self.cassette.lock().expect("cassette lock").clone()
    }
}

struct Recorder {
    inner: Session,
    path: PathBuf,
    cassette: Arc<Mutex<Cassette>>,
}

impl Backend for Recorder {
    fn execute(&mut self, action: &Action) -> Result<Output, SutError> {
        let out = self.inner.execute_action(action)?;
        let mut cassette = self.cassette.lock().expect("cassette lock");
        cassette.entries.push(CassetteEntry {
            fingerprint: action.fingerprint(),
            output: out.clone(),
        });
        cassette.save(&self.path)?;
        Ok(out)
    }
}

impl SessionFactory for RecordingFactory {
    fn open(&self) -> Result<Session, SutError> {
        Ok(Session::new(
            self.ids.next("record"),
            Box::new(Recorder {
                inner: self.inner.open()?,
                path: self.path.clone(),
                cassette: Arc::clone(&self.cassette),
            }),
        ))
    }

    fn describe(&self) -> String {
        format!("{} recorded to {}", self.inner.describe(), self.path.display())
    }
}

/// Serves a recorded cassette without touching any SUT.
pub struct ReplayFactory {
    entries: Arc<Vec<CassetteEntry>>,
    cursor: Arc<Mutex<usize>>,
    ids: SessionIds,
    origin: String,
}

impl ReplayFactory {
    pub fn new(cassette: Cassette) -> Self {
        ReplayFactory {
            entries: Arc::new(cassette.entries),
            cursor: Arc::new(Mutex::new(0)),
            ids: SessionIds::default(),
            origin: "in-memory cassette".into(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, SutError> {
        let mut f = ReplayFactory::new(Cassette::load(path)?);
        f.origin = path.display().to_string();
        Ok(f)
    }

    /// Entries not yet consumed.
    pub fn remaining(&self) -> usize {
        self.entries.len() - *self.cursor.lock().expect("cursor lock")
    }
}

struct Player {
    entries: Arc<Vec<CassetteEntry>>,
    cursor: Arc<Mutex<usize>>,
}

impl Backend for Player {
    fn execute(&mut self, action: &Action) -> Result<Output, SutError> {
        let found = action.fingerprint();
        let mut cursor = self.cursor.lock().expect("cursor lock");
        let entry = self
            .entries
            .get(*cursor)
            .ok_or_else(|| SutError::CassetteExhausted { found: found.clone() })?;
        if entry.fingerprint != found {
            return Err(SutError::FingerprintMismatch {
                expected: entry.fingerprint.clone(),
                found,
            });
        }
        *cursor += 1;
        Ok(entry.output.clone())
    }
}

impl SessionFactory for ReplayFactory {
    fn open(&self) -> Result<Session, SutError> {
        Ok(Session::new(
            self.ids.next("replay"),
            Box::new(Player {
                entries: Arc::clone(&self.entries),
                cursor: Arc::clone(&self.cursor),
            }),
        ))
    }

    fn describe(&self) -> String {
        format!("replay of {}", self.origin)
    }
}

/// Record mode wraps `inner`; replay mode reads the cassette at `path` and
/// needs no SUT.
pub fn record_replay(
    mode: CassetteMode,
    path: &Path,
    inner: Option<Arc<dyn SessionFactory>>,
) -> Result<Arc<dyn SessionFactory>, SutError> {
    match mode {
        CassetteMode::Record => {
            let inner = inner.ok_or_else(|| {
                SutError::Config("record mode needs a system under test to record".into())
            })?;
            Ok(Arc::new(RecordingFactory::new(inner, path)?))
        }
        CassetteMode::Replay => Ok(Arc::new(ReplayFactory::load(path)?)),
    }
}
