//! Actions, input sequences and outputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::SutError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    /// Index within the owning sequence.
    #[serde(default)]
    pub position: usize,
    pub kind: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
}

impl Action {
    pub fn new(kind: impl Into<String>) -> Self {
        Action {
            position: 0,
            kind: kind.into(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(name.to_string(), value.into());
        self
    }

    pub fn param(&self, name: &str) -> Option<&Value> {
        self.parameters.get(name)
    }

    /// `kind` plus parameters in key order; two actions that differ only in
    /// parameter insertion order share a fingerprint.
    pub fn fingerprint(&self) -> String {
        let params: Vec<String> = self
            .parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("{}?{}", self.kind, params.join("&"))
    }
}

/// The actions of `Input(index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSequence {
    pub index: usize,
    pub actions: Vec<Action>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionRecord {
    kind: String,
    #[serde(default)]
    parameters: BTreeMap<String, Value>,
}

impl ActionSequence {
    pub fn new(index: usize, actions: Vec<Action>) -> Self {
        let mut seq = ActionSequence { index, actions };
        seq.renumber();
        seq
    }

    /// Restores the dense-position invariant after edits.
    pub fn renumber(&mut self) {
        for (i, a) in self.actions.iter_mut().enumerate() {
            a.position = i;
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Decodes an input file: a JSON list of `{kind, parameters}` objects.
    pub fn from_json(text: &str, index: usize) -> Result<Self, SutError> {
        let records: Vec<ActionRecord> =
            serde_json::from_str(text).map_err(|e| SutError::Schema(e.to_string()))?;
        Ok(ActionSequence::new(
            index,
            records
                .into_iter()
                .map(|r| Action {
                    position: 0,
                    kind: r.kind,
                    parameters: r.parameters,
                })
                .collect(),
        ))
    }

    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .actions
            .iter()
            .map(|a| serde_json::json!({"kind": a.kind, "parameters": a.parameters}))
            .collect();
        serde_json::to_string_pretty(&records).expect("actions serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub status: String,
    pub payload: Value,
    /// Number of result items when the payload carries a result list.
    pub summary_size: usize,
}

impl Output {
    pub fn ok(payload: Value) -> Self {
        let summary_size = result_items(&payload).map_or(0, <[Value]>::len);
        Output {
            status: "ok".into(),
            payload,
            summary_size,
        }
    }

    pub fn error(status: &str, message: &str) -> Self {
        Output {
            status: status.into(),
            payload: serde_json::json!({ "error": message }),
            summary_size: 0,
        }
    }

    /// The result list, when the payload has one.
    pub fn results(&self) -> Option<&[Value]> {
        result_items(&self.payload)
    }
}

fn result_items(payload: &Value) -> Option<&[Value]> {
    match payload {
        Value::Array(items) => Some(items),
        Value::Object(map) => map.get("results").and_then(Value::as_array).map(Vec::as_slice),
        _ => None,
    }
}

/// Outputs of one executed sequence, one per action position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSequence {
    pub outputs: Vec<Output>,
}
