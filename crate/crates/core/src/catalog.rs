//! API catalog: the SUT functions an EMR may call, with the documentation
//! that is shown to the model.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiParam {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiEntry {
    pub name: String,
    #[serde(default)]
    pub parameters: Vec<ApiParam>,
    pub returns: String,
    pub doc: String,
}

impl ApiEntry {
    pub fn new(name: impl Into<String>, params: &[(&str, &str)], returns: &str, doc: &str) -> Self {
        ApiEntry {
            name: name.into(),
            parameters: params
                .iter()
                .map(|(n, t)| ApiParam {
                    name: n.to_string(),
                    ty: t.to_string(),
                })
                .collect(),
            returns: returns.to_string(),
            doc: doc.to_string(),
        }
    }

    /// `name(type param, ...) -> returns`
    pub fn signature(&self) -> String {
        let params = self
            .parameters
            .iter()
            .map(|p| format!("{} {}", p.ty, p.name))
            .collect::<Vec<_>>()
            .join(", ");
        format!("{} {}({})", self.returns, self.name, params)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("catalog entry {index} ({name}): {message}")]
pub struct CatalogError {
    pub index: usize,
    pub name: String,
    pub message: String,
}

/// Entries in file order with unique names and non-empty docs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct ApiCatalog {
    entries: Vec<ApiEntry>,
}

impl ApiCatalog {
    pub fn empty() -> Self {
        ApiCatalog::default()
    }

    pub fn new(entries: Vec<ApiEntry>) -> Result<Self, CatalogError> {
        let mut seen = HashSet::new();
        for (index, e) in entries.iter().enumerate() {
            let fail = |message: &str| CatalogError {
                index,
                name: e.name.clone(),
                message: message.to_string(),
            };
            if e.name.is_empty()
                || !e.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                || e.name.starts_with(|c: char| c.is_ascii_digit())
            {
                return Err(fail("name must be an identifier"));
            }
            if e.doc.trim().is_empty() {
                return Err(fail("doc must not be empty"));
            }
            if !seen.insert(e.name.as_str()) {
                return Err(fail("duplicate name"));
            }
        }
        Ok(ApiCatalog { entries })
    }

    /// Decodes the JSON list form, reporting the first offending entry.
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let raw: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| CatalogError {
            index: 0,
            name: String::new(),
            message: format!("not a JSON list of entries: {e}"),
        })?;
        let mut entries = Vec::with_capacity(raw.len());
        for (index, value) in raw.into_iter().enumerate() {
            let name = value
                .get("name")
                .and_then(|n| n.as_str())
                .unwrap_or("")
                .to_string();
            let entry = serde_json::from_value(value).map_err(|e| CatalogError {
                index,
                name,
                message: e.to_string(),
            })?;
            entries.push(entry);
        }
        ApiCatalog::new(entries)
    }

    pub fn entries(&self) -> &[ApiEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ApiEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    /// Adds an entry, replacing one with the same name.
    pub fn with(mut self, entry: ApiEntry) -> Self {
        match self.entries.iter_mut().find(|e| e.name == entry.name) {
            Some(existing) => *existing = entry,
            None => self.entries.push(entry),
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("catalog serializes")
    }
}
