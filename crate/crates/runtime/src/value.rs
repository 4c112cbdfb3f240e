use std::fmt;

use emrkit_sut::{Action, ActionSequence, Output};
use serde_json::Value as Json;

/// A runtime value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Str(String),
    /// An input sequence; `index` is 0 until CREATE registers it.
    Seq(ActionSequence),
    Action(Action),
    Output(Output),
    List(Vec<Value>),
    /// Structured data from payloads, e.g. a result item.
    Json(Json),
    Null,
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "boolean",
            Value::Int(_) => "integer",
            Value::Str(_) => "string",
            Value::Seq(_) => "input sequence",
            Value::Action(_) => "action",
            Value::Output(_) => "output",
            Value::List(_) => "list",
            Value::Json(_) => "structured value",
            Value::Null => "null",
        }
    }

    /// Scalars become native values; objects and arrays stay structured.
    pub fn from_json(v: &Json) -> Value {
        match v {
            Json::Null => Value::Null,
            Json::Bool(b) => Value::Bool(*b),
            Json::Number(n) => n.as_i64().map_or_else(|| Value::Json(v.clone()), Value::Int),
            Json::String(s) => Value::Str(s.clone()),
            _ => Value::Json(v.clone()),
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Bool(b) => Json::Bool(*b),
            Value::Int(i) => Json::from(*i),
            Value::Str(s) => Json::String(s.clone()),
            Value::Seq(s) => serde_json::to_value(&s.actions).expect("actions serialize"),
            Value::Action(a) => serde_json::to_value(a).expect("action serializes"),
            Value::Output(o) => serde_json::to_value(o).expect("output serializes"),
            Value::List(items) => Json::Array(items.iter().map(Value::to_json).collect()),
            Value::Json(j) => j.clone(),
            Value::Null => Json::Null,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

/// Compact rendering used in failure reports.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Seq(s) => write!(f, "input sequence of {} actions", s.actions.len()),
            Value::Action(a) => {
                let params: Vec<String> = a
                    .parameters
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                write!(f, "{}({}) at position {}", a.kind, params.join(", "), a.position)
            }
            Value::Output(o) => write!(f, "output [{}] with {} results", o.status, o.summary_size),
            Value::List(items) => {
                let parts: Vec<String> = items.iter().map(Value::to_string).collect();
                write!(f, "[{}]", parts.join(", "))
            }
            Value::Json(j) => write!(f, "{j}"),
            Value::Null => f.write_str("null"),
        }
    }
}
