use std::path::Path;

use emrkit_core::{has_errors, parse_emr, validate, ApiCatalog};
use serde::{Deserialize, Serialize};

use crate::LlmError;

/// An MR paired with its EMR, shown to the model before any conversion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub name: String,
    pub mr: String,
    pub emr: String,
}

const BUILTIN: [(&str, &str); 3] = [
    ("1-repeated-request", include_str!("../assets/fewshot/1-repeated-request.smrl")),
    ("2-lower-privilege", include_str!("../assets/fewshot/2-lower-privilege.smrl")),
    ("3-anonymous-access", include_str!("../assets/fewshot/3-anonymous-access.smrl")),
];

/// Splits a `// MR: <text>` header from the EMR below it and checks that
/// the EMR parses and validates without errors.
pub fn parse_example(name: &str, text: &str) -> Result<FewShotExample, LlmError> {
    let err = |message: String| LlmError::FewShot {
        name: name.to_string(),
        message,
    };
    let text = text.replace("\r\n", "\n");
    let (header, body) = text.split_once('\n').ok_or_else(|| err("missing `// MR:` header".into()))?;
    let mr = header
        .strip_prefix("// MR:")
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .ok_or_else(|| err("first line must be `// MR: <text>`".into()))?;
    let emr = body.trim().to_string();
    let ast = parse_emr(&emr).map_err(|e| err(e.to_string()))?;
    let diags = validate(&ast, &ApiCatalog::empty());
    if has_errors(&diags) {
        let first = diags.iter().find(|d| d.severity == emrkit_core::Severity::Error).expect("an error");
        return Err(err(first.to_string()));
    }
    Ok(FewShotExample {
        name: name.to_string(),
        mr: mr.to_string(),
        emr,
    })
}

pub fn builtin_fewshot() -> Vec<FewShotExample> {
    BUILTIN
        .iter()
        .map(|(name, text)| parse_example(name, text).expect("built-in few-shot examples are valid"))
        .collect()
}

/// Every `*.smrl` file in `dir`, in file-name order.
pub fn load_fewshot(dir: &Path) -> Result<Vec<FewShotExample>, LlmError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| LlmError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "smrl"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(LlmError::FewShot {
            name: dir.display().to_string(),
            message: "no .smrl examples".into(),
        });
    }
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| LlmError::io(p, e))?;
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("example");
            parse_example(name, &text)
        })
        .collect()
}
