use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use crate::transcript::Pipeline;
use crate::LlmError;

/// One prompt of a pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptPhase {
    pub pipeline: Pipeline,
    pub ordinal: u32,
    /// Asset file name, e.g. `3-sentences.txt`.
    pub file: &'static str,
    pub template: String,
    /// What the assistant is expected to answer with.
    pub expects: &'static str,
}

const DERIVE: [(&str, &str, &str); 4] = [
    ("1-context.txt", include_str!("../assets/derive/1-context.txt"), "acknowledgement"),
    ("2-document.txt", include_str!("../assets/derive/2-document.txt"), "document summary"),
    ("3-sentences.txt", include_str!("../assets/derive/3-sentences.txt"), "verbatim sentences, one per line"),
    ("4-mrs.txt", include_str!("../assets/derive/4-mrs.txt"), "numbered MR list with sources"),
];

const CONSOLIDATE: (&str, &str) = ("2-consolidate.txt", include_str!("../assets/derive/2-consolidate.txt"));

const GENERATE: [(&str, &str, &str); 6] = [
    ("1-context.txt", include_str!("../assets/generate/1-context.txt"), "acknowledgement"),
    ("2-syntax.txt", include_str!("../assets/generate/2-syntax.txt"), "acknowledgement"),
    ("3-format.txt", include_str!("../assets/generate/3-format.txt"), "acknowledgement"),
    ("4-fewshot.txt", include_str!("../assets/generate/4-fewshot.txt"), "acknowledgement"),
    ("5-apis.txt", include_str!("../assets/generate/5-apis.txt"), "acknowledgement"),
    ("6-mr.txt", include_str!("../assets/generate/6-mr.txt"), "EMR code block and explanations"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    pub derive: Vec<PromptPhase>,
    pub generate: Vec<PromptPhase>,
    /// Sent after the last part of a multi-part document.
    pub consolidate: String,
}

fn phases(pipeline: Pipeline, table: &[(&'static str, &str, &'static str)]) -> Vec<PromptPhase> {
    table
        .iter()
        .enumerate()
        .map(|(i, (file, text, expects))| PromptPhase {
            pipeline,
            ordinal: i as u32 + 1,
            file,
            template: text.to_string(),
            expects,
        })
        .collect()
}

impl Templates {
    pub fn builtin() -> Templates {
        Templates {
            derive: phases(Pipeline::Derive, &DERIVE),
            generate: phases(Pipeline::Generate, &GENERATE),
            consolidate: CONSOLIDATE.1.to_string(),
        }
    }

    /// Built-in templates with any same-named file under `dir/derive` or
    /// `dir/generate` taking precedence.
    pub fn load(dir: &Path) -> Result<Templates, LlmError> {
        if !dir.is_dir() {
            return Err(LlmError::Template {
                name: dir.display().to_string(),
                message: "not a directory".into(),
            });
        }
        let mut t = Templates::builtin();
        let read = |sub: &str, file: &str| -> Result<Option<String>, LlmError> {
            let path = dir.join(sub).join(file);
            if path.exists() {
                std::fs::read_to_string(&path).map(Some).map_err(|e| LlmError::io(&path, e))
            } else {
                Ok(None)
            }
        };
        for p in &mut t.derive {
            if let Some(text) = read("derive", p.file)? {
                p.template = text;
            }
        }
        for p in &mut t.generate {
            if let Some(text) = read("generate", p.file)? {
                p.template = text;
            }
        }
        if let Some(text) = read("derive", CONSOLIDATE.0)? {
            t.consolidate = text;
        }
        Ok(t)
    }

    pub fn phase(&self, pipeline: Pipeline, ordinal: u32) -> &PromptPhase {
        let list = match pipeline {
            Pipeline::Derive => &self.derive,
            Pipeline::Generate => &self.generate,
        };
        &list[ordinal as usize - 1]
    }
}

fn placeholder() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{([a-z_]+)\}\}").expect("placeholder pattern"))
}

/// Fills every `{{name}}` placeholder. A placeholder without a value is an
/// error; values are inserted as-is and never rescanned.
pub fn render(name: &str, template: &str, vars: &BTreeMap<&str, String>) -> Result<String, LlmError> {
    let mut out = String::with_capacity(template.len());
    let mut last = 0;
    for cap in placeholder().captures_iter(template) {
        let whole = cap.get(0).expect("match");
        let key = &cap[1];
        let value = vars.get(key).ok_or_else(|| LlmError::Template {
            name: name.to_string(),
            message: format!("no value for {{{{{key}}}}}"),
        })?;
        out.push_str(&template[last..whole.start()]);
        out.push_str(value);
        last = whole.end();
    }
    out.push_str(&template[last..]);
    Ok(out.trim_end().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_are_not_rescanned() {
        let vars = BTreeMap::from([("mr", "{{document}}".to_string())]);
        assert_eq!(render("t", "x {{mr}} y", &vars).unwrap(), "x {{document}} y");
    }

    #[test]
    fn smrl_braces_are_not_placeholders() {
        assert_eq!(render("t", "MR {{\n}}", &BTreeMap::new()).unwrap(), "MR {{\n}}");
    }

    #[test]
    fn missing_value_is_reported() {
        let err = render("t", "{{apis}}", &BTreeMap::new()).unwrap_err();
        assert!(err.to_string().contains("{{apis}}"));
    }

    #[test]
    fn phase_counts() {
        let t = Templates::builtin();
        assert_eq!(t.derive.len(), 4);
        assert_eq!(t.generate.len(), 6);
        assert!(t.generate.iter().enumerate().all(|(i, p)| p.ordinal == i as u32 + 1));
    }
}
