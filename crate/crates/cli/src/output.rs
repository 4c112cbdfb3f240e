use std::path::Path;

use crate::exit::CliError;

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

/// Keeps ids usable as file names.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
