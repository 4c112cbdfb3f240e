use emrkit_sut::{Action, ActionSequence};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::RuntimeError;

/// An edit that turns a source input into a follow-up input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Transform {
    Identity,
    SetParameter { position: usize, name: String, value: Json },
    RemoveParameter { position: usize, name: String },
    /// Inserts before `position`; `position == len` appends.
    InsertAction { position: usize, action: Action },
    RemoveAction { position: usize },
    ReplaceAction { position: usize, action: Action },
}

/// Deep copy of `source` with `transform` applied; positions are renumbered.
pub fn create_followup(source: &ActionSequence, transform: &Transform) -> Result<ActionSequence, RuntimeError> {
    let mut copy = source.clone();
    let len = copy.actions.len();
    let check = |position: usize, limit: usize| {
        if position < limit {
            Ok(())
        } else {
            Err(RuntimeError::PositionOutOfRange {
                position: position as i64,
                len,
            })
        }
    };
    match transform {
        Transform::Identity => {}
        Transform::SetParameter { position, name, value } => {
            check(*position, len)?;
            copy.actions[*position].parameters.insert(name.clone(), value.clone());
        }
        Transform::RemoveParameter { position, name } => {
            check(*position, len)?;
            copy.actions[*position].parameters.remove(name);
        }
        Transform::InsertAction { position, action } => {
            check(*position, len + 1)?;
            copy.actions.insert(*position, action.clone());
        }
        Transform::RemoveAction { position } => {
            check(*position, len)?;
            copy.actions.remove(*position);
        }
        Transform::ReplaceAction { position, action } => {
            check(*position, len)?;
            copy.actions[*position] = action.clone();
        }
    }
    copy.renumber();
    Ok(copy)
}
