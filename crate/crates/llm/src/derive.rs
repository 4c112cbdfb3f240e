use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::client::{chat, ChatClient};
use crate::config::LlmConfig;
use crate::document::{chunk_document, Document};
use crate::templates::{render, Templates};
use crate::transcript::{Conversation, Pipeline, TranscriptStore};
use crate::LlmError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetamorphicRelation {
    /// `MR1`, `MR2`, ... in reply order.
    pub id: String,
    pub text: String,
    pub source_sentences: Vec<String>,
    pub document: String,
    /// Requirement label (e.g. `R1`) that opens the cited document line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirement_ref: Option<String>,
}

/// A sentence the model quoted that does not occur in the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedSentence {
    pub phase: u32,
    pub sentence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveOutcome {
    pub mrs: Vec<MetamorphicRelation>,
    pub sentences: Vec<String>,
    pub flagged: Vec<FlaggedSentence>,
    pub conversation: Conversation,
}

fn is_none_reply(reply: &str) -> bool {
    let t = reply.trim().trim_end_matches('.');
    t.eq_ignore_ascii_case("none")
}

fn strip_quotes(s: &str) -> &str {
    let s = s.trim();
    for (open, close) in [('"', '"'), ('\u{201c}', '\u{201d}'), ('\'', '\'')] {
        if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
            return s[open.len_utf8()..s.len() - close.len_utf8()].trim();
        }
    }
    s
}

fn bullet() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:[-*\u{2022}]|\d+[.)])\s+").expect("bullet pattern"))
}

/// Phase-3 reply to sentences: one per non-empty line, bullets and
/// surrounding quotes removed. `NONE` means no sentences.
pub fn parse_sentences(reply: &str) -> Vec<String> {
    if is_none_reply(reply) {
        return Vec::new();
    }
    reply
        .lines()
        .map(|l| strip_quotes(&bullet().replace(l, "")).to_string())
        .filter(|l| !l.is_empty())
        .collect()
}

fn mr_item() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"^\s*(\d+)[.)]\s+(.*?)\s*\[Source:\s*["\u{201c}](.*)["\u{201d}]\s*\]\s*$"#).expect("MR pattern")
    })
}

fn numbered() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*\d+[.)]\s+").expect("numbered pattern"))
}

/// Phase-4 reply to `(text, source sentence)` pairs. Numbered lines that do
/// not cite a source are format errors, as is a reply with no items that
/// is not `NONE`. Unnumbered lines are ignored.
pub fn parse_mr_list(reply: &str) -> Result<Vec<(String, String)>, LlmError> {
    if is_none_reply(reply) {
        return Ok(Vec::new());
    }
    let mut items = Vec::new();
    for line in reply.lines() {
        if let Some(c) = mr_item().captures(line) {
            let text = c[2].trim().to_string();
            if text.is_empty() {
                return Err(LlmError::ResponseFormat {
                    phase: 4,
                    message: format!("item {} has no MR text", &c[1]),
                });
            }
            items.push((text, c[3].trim().to_string()));
        } else if numbered().is_match(line) {
            return Err(LlmError::ResponseFormat {
                phase: 4,
                message: format!("item without a [Source: \"...\"] citation: {}", line.trim()),
            });
        }
    }
    if items.is_empty() {
        return Err(LlmError::ResponseFormat {
            phase: 4,
            message: "no numbered MR items and the reply is not NONE".into(),
        });
    }
    Ok(items)
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn requirement_label() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:[-*]\s*)?\**(R\d+)\**\s*[:.)]").expect("label pattern"))
}

/// Label of the requirement whose line contains `sentence`.
fn requirement_ref(doc: &str, sentence: &str) -> Option<String> {
    let needle = collapse(sentence);
    doc.lines()
        .find(|l| collapse(l).contains(&needle))
        .and_then(|l| requirement_label().captures(l).map(|c| c[1].to_string()))
}

/// Runs the four-phase derivation conversation over one document.
pub fn derive_mrs(
    document: &Document,
    config: &LlmConfig,
    templates: &Templates,
    client: &mut dyn ChatClient,
    store: Option<&TranscriptStore>,
) -> Result<DeriveOutcome, LlmError> {
    config.validate()?;
    let mut conv = Conversation::new(
        Pipeline::Derive,
        &document.id,
        &client.describe(),
        &config.model,
        config.temperature,
    );
    let no_vars = BTreeMap::new();
    let t = |n: u32| templates.phase(Pipeline::Derive, n);

    chat(client, &mut conv, store, 1, None, render(t(1).file, &t(1).template, &no_vars)?)?;

    let parts = chunk_document(&document.text, config.chunk_chars);
    for (i, part) in parts.iter().enumerate() {
        let vars = BTreeMap::from([
            ("part", (i + 1).to_string()),
            ("parts", parts.len().to_string()),
            ("document", part.clone()),
        ]);
        chat(client, &mut conv, store, 2, None, render(t(2).file, &t(2).template, &vars)?)?;
    }
    if parts.len() > 1 {
        let vars = BTreeMap::from([("parts", parts.len().to_string())]);
        chat(client, &mut conv, store, 2, None, render("2-consolidate.txt", &templates.consolidate, &vars)?)?;
    }

    let reply = chat(client, &mut conv, store, 3, None, render(t(3).file, &t(3).template, &no_vars)?)?;
    let sentences = parse_sentences(&reply);
    let haystack = collapse(&document.text);
    let mut flagged: Vec<FlaggedSentence> = sentences
        .iter()
        .filter(|s| !haystack.contains(&collapse(s)))
        .map(|s| FlaggedSentence {
            phase: 3,
            sentence: s.clone(),
        })
        .collect();

    let mut mrs = Vec::new();
    if !sentences.is_empty() {
        let limit = config
            .mrs_per_document
            .map_or(String::new(), |n| format!(" Write at most {n} MRs."));
        let vars = BTreeMap::from([("limit", limit)]);
        let reply = chat(client, &mut conv, store, 4, None, render(t(4).file, &t(4).template, &vars)?)?;
        for (i, (text, source)) in parse_mr_list(&reply)?.into_iter().enumerate() {
            if !haystack.contains(&collapse(&source)) {
                flagged.push(FlaggedSentence {
                    phase: 4,
                    sentence: source.clone(),
                });
            }
            mrs.push(MetamorphicRelation {
                id: format!("MR{}", i + 1),
                requirement_ref: requirement_ref(&document.text, &source),
                text,
                source_sentences: vec![source],
                document: document.id.clone(),
            });
        }
        if let Some(n) = config.mrs_per_document {
            mrs.truncate(n as usize);
        }
    }
    Ok(DeriveOutcome {
        mrs,
        sentences,
        flagged,
        conversation: conv,
    })
}

/// Concatenates per-document MR lists, renumbering ids and dropping texts
/// already seen when `dedupe` is set.
pub fn merge_mrs(lists: Vec<Vec<MetamorphicRelation>>, dedupe: bool) -> Vec<MetamorphicRelation> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mr in lists.into_iter().flatten() {
        if dedupe && !seen.insert(collapse(&mr.text).to_lowercase()) {
            continue;
        }
        out.push(MetamorphicRelation {
            id: format!("MR{}", out.len() + 1),
            ..mr
        });
    }
    out
}
