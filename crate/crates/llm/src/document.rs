use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{sha256_hex, LlmError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    /// SHA-256 of the normalized text.
    pub id: String,
    pub path: Option<PathBuf>,
    pub text: String,
}

impl Document {
    pub fn from_text(text: &str) -> Result<Document, LlmError> {
        let text = normalize_text(text);
        if text.trim().is_empty() {
            return Err(LlmError::EmptyDocument);
        }
        Ok(Document {
            id: document_id(&text),
            path: None,
            text,
        })
    }

    /// First 16 hex digits of the id, used in file names.
    pub fn short_id(&self) -> &str {
        &self.id[..16]
    }
}

/// Unifies line endings and drops a leading byte-order mark.
pub fn normalize_text(text: &str) -> String {
    text.trim_start_matches('\u{feff}').replace("\r\n", "\n").replace('\r', "\n")
}

pub fn document_id(normalized: &str) -> String {
    sha256_hex(normalized.as_bytes())
}

const TEXT_EXTENSIONS: [&str; 4] = ["txt", "text", "md", "markdown"];

/// Reads a plain-text or markdown requirements document.
pub fn ingest_document(path: &Path) -> Result<Document, LlmError> {
    let unsupported = |reason: String| LlmError::UnsupportedFormat {
        path: path.to_path_buf(),
        reason,
    };
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    if !TEXT_EXTENSIONS.contains(&ext.as_str()) {
        return Err(unsupported(format!(
            "expected one of .{}, found {}",
            TEXT_EXTENSIONS.join(", ."),
            if ext.is_empty() { "no extension".to_string() } else { format!(".{ext}") }
        )));
    }
    let bytes = std::fs::read(path).map_err(|e| LlmError::io(path, e))?;
    if bytes.starts_with(b"%PDF") {
        return Err(unsupported("PDF content".into()));
    }
    let text = String::from_utf8(bytes).map_err(|_| unsupported("not UTF-8 text".into()))?;
    let mut doc = Document::from_text(&text).map_err(|e| match e {
        LlmError::EmptyDocument => unsupported("the document is empty".into()),
        other => other,
    })?;
    doc.path = Some(path.to_path_buf());
    Ok(doc)
}

/// Splits `text` into ordered parts of at most `budget` characters whose
/// concatenation is `text`. Cuts prefer heading lines, then blank-line
/// paragraph breaks, then line breaks; a single overlong line is cut at a
/// character boundary.
pub fn chunk_document(text: &str, budget: usize) -> Vec<String> {
    assert!(budget > 0, "chunk budget must be positive");
    let mut parts = Vec::new();
    let mut rest = text;
    while rest.chars().count() > budget {
        let limit = rest.char_indices().nth(budget).map_or(rest.len(), |(i, _)| i);
        let window = &rest[..limit];
        let cut = last_heading_start(window)
            .or_else(|| window.rfind("\n\n").map(|i| i + 2))
            .or_else(|| window.rfind('\n').map(|i| i + 1))
            .filter(|&i| i > 0)
            .unwrap_or(limit);
        parts.push(rest[..cut].to_string());
        rest = &rest[cut..];
    }
    if !rest.is_empty() || parts.is_empty() {
        parts.push(rest.to_string());
    }
    parts
}

/// Byte offset of the last markdown heading line that starts after offset 0.
fn last_heading_start(window: &str) -> Option<usize> {
    let mut found = None;
    let mut offset = 0;
    for line in window.split_inclusive('\n') {
        if offset > 0 && line.starts_with('#') {
            found = Some(offset);
        }
        offset += line.len();
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_break_at_headings_first() {
        let text = "# A\nalpha alpha\n\nmore\n# B\nbeta\n";
        let parts = chunk_document(text, 24);
        assert_eq!(parts, ["# A\nalpha alpha\n\nmore\n", "# B\nbeta\n"]);
    }

    #[test]
    fn overlong_line_is_cut_on_a_char_boundary() {
        let text = "é".repeat(10);
        let parts = chunk_document(&text, 3);
        assert_eq!(parts.concat(), text);
        assert!(parts.iter().all(|p| p.chars().count() <= 3));
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_text("\u{feff}a\r\nb\rc"), "a\nb\nc");
    }
}
