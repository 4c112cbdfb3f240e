//! Systems under test for EMR execution.
//!
//! Every SUT is reached through a [`SessionFactory`], which hands out
//! single-owner [`Session`]s that record each executed action with its
//! output. Three factories are provided: the in-process [`MockShop`], the
//! live [`HttpSut`], and cassette [record/replay](cassette) wrappers.

pub mod action;
pub mod cassette;
pub mod http;
pub mod mock;
pub mod session;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use action::{Action, ActionSequence, Output, OutputSequence};
pub use cassette::{record_replay, Cassette, CassetteEntry, CassetteMode, RecordingFactory, ReplayFactory};
pub use emrkit_core::{ApiCatalog, ApiEntry, CatalogError};
pub use http::{AdapterConfig, HttpSut};
pub use mock::{Fault, MockShop};
pub use session::{Backend, Session, SessionFactory};

#[derive(Debug, Error)]
pub enum SutError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("fingerprint mismatch: cassette expects `{expected}` but the action is `{found}`")]
    FingerprintMismatch { expected: String, found: String },
    #[error("cassette exhausted before `{found}`")]
    CassetteExhausted { found: String },
    #[error("unknown action kind '{0}'")]
    UnknownAction(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("configuration error: {0}")]
    Config(String),
}

impl SutError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        SutError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

/// Reads an API catalog file (a JSON list of entries).
pub fn load_api_catalog(path: &Path) -> Result<ApiCatalog, SutError> {
    let text = std::fs::read_to_string(path).map_err(|e| SutError::io(path, e))?;
    Ok(ApiCatalog::from_json(&text)?)
}

/// Reads one input-sequence file as `Input(1)`.
pub fn load_input(path: &Path) -> Result<ActionSequence, SutError> {
    let text = std::fs::read_to_string(path).map_err(|e| SutError::io(path, e))?;
    ActionSequence::from_json(&text, 1).map_err(|e| match e {
        SutError::Schema(m) => SutError::Schema(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SutKind {
    #[default]
    Mock,
    Http,
}

/// Which SUT to talk to and how.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SutConfig {
    #[serde(default)]
    pub kind: SutKind,
    /// Mock faults to seed.
    #[serde(default)]
    pub faults: Vec<Fault>,
    /// Adapter config for `kind = "http"`.
    #[serde(default)]
    pub adapter: Option<PathBuf>,
    #[serde(default)]
    pub cassette: Option<PathBuf>,
    #[serde(default)]
    pub cassette_mode: Option<CassetteMode>,
}

pub fn build_factory(config: &SutConfig) -> Result<Arc<dyn SessionFactory>, SutError> {
    if let (Some(CassetteMode::Replay), Some(path)) = (config.cassette_mode, &config.cassette) {
        return Ok(Arc::new(ReplayFactory::load(path)?));
    }
    let base: Arc<dyn SessionFactory> = match config.kind {
        SutKind::Mock => Arc::new(MockShop::with_faults(config.faults.iter().copied())),
        SutKind::Http => {
            let path = config
                .adapter
                .as_ref()
                .ok_or_else(|| SutError::Config("kind = \"http\" needs an adapter file".into()))?;
            Arc::new(HttpSut::new(AdapterConfig::load(path)?))
        }
    };
    match (config.cassette_mode, &config.cassette) {
        (Some(mode), Some(path)) => record_replay(mode, path, Some(base)),
        (Some(_), None) => Err(SutError::Config("cassette_mode needs a cassette path".into())),
        _ => Ok(base),
    }
}
