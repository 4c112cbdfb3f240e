use std::sync::atomic::{AtomicUsize, Ordering};

use crate::action::{Action, ActionSequence, Output, OutputSequence};
use crate::SutError;

/// Executes single actions; wrapped by [`Session`], which does the recording.
pub trait Backend: Send {
    fn execute(&mut self, action: &Action) -> Result<Output, SutError>;
}

/// One exclusive conversation with a SUT. Every executed action and its
/// output is recorded in execution order.
pub struct Session {
    id: String,
    backend: Box<dyn Backend>,
    record: Vec<(Action, Output)>,
}

impl Session {
    pub fn new(id: impl Into<String>, backend: Box<dyn Backend>) -> Self {
        Session {
            id: id.into(),
            backend,
            record: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn execute_action(&mut self, action: &Action) -> Result<Output, SutError> {
        let out = self.backend.execute(action)?;
        self.record.push((action.clone(), out.clone()));
        Ok(out)
    }

    pub fn execute_sequence(&mut self, seq: &ActionSequence) -> Result<OutputSequence, SutError> {
        let outputs = seq
            .actions
            .iter()
            .map(|a| self.execute_action(a))
            .collect::<Result<_, _>>()?;
        Ok(OutputSequence { outputs })
    }

    pub fn record(&self) -> &[(Action, Output)] {
        &self.record
    }
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("id", &self.id)
            .field("executed", &self.record.len())
            .finish()
    }
}

/// Opens fresh sessions.
pub trait SessionFactory: Send + Sync {
    fn open(&self) -> Result<Session, SutError>;

    /// True when sessions share no state, so callers may run them in
    /// parallel.
    fn isolated(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

/// Sequential session ids with a fixed prefix.
#[derive(Debug, Default)]
pub(crate) struct SessionIds {
    next: AtomicUsize,
}

impl SessionIds {
    pub(crate) fn next(&self, prefix: &str) -> String {
        format!("{prefix}-{}", self.next.fetch_add(1, Ordering::Relaxed) + 1)
    }
}
