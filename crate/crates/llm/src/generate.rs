use std::collections::BTreeMap;
use std::sync::OnceLock;

use emrkit_core::{
    explanations, has_errors, parse_emr, repair, stub_names, validate, ApiCatalog, Diagnostic, EmrAst, RepairLog,
};
use regex::Regex;
use serde::Serialize;

use crate::client::{chat, ChatClient};
use crate::config::LlmConfig;
use crate::derive::MetamorphicRelation;
use crate::fewshot::FewShotExample;
use crate::templates::{render, Templates};
use crate::transcript::{Conversation, Pipeline, TranscriptStore};
use crate::{sha256_hex, LlmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmrStatus {
    /// Parsed as returned.
    Ok,
    /// Parsed after auto-repair.
    Repaired,
    /// Kept for the record; could not be parsed even after repair.
    Unparseable,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratedEmr {
    pub mr: String,
    pub mr_text: String,
    pub status: EmrStatus,
    /// Code extracted from the reply, after repair.
    pub source: String,
    pub repair_log: RepairLog,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
    /// Functions neither built in nor in the API catalog.
    pub stubs: Vec<String>,
    /// Statement index to explanation text.
    pub explanations: BTreeMap<usize, String>,
    #[serde(skip)]
    pub ast: Option<EmrAst>,
}

impl GeneratedEmr {
    pub fn has_errors(&self) -> bool {
        self.status == EmrStatus::Unparseable || has_errors(&self.diagnostics)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerateOutcome {
    pub emrs: Vec<GeneratedEmr>,
    pub conversation: Conversation,
}

const CONSTRUCTS: [(&str, &str); 8] = [
    ("Input(int i)", "returns the i-th input sequence"),
    ("Output(int i)", "returns the sequence of outputs generated by Input(i)"),
    ("Output(Object x, int p)", "returns the output generated by the action at position p of input sequence x"),
    ("CREATE(Object y, Object x)", "creates y as a copy of x"),
    ("IMPLIES(boolean x, boolean y)", "is equivalent to the Java expression !x||y"),
    ("NOT(boolean x)", "is equivalent to the Java expression !x"),
    ("OR(boolean x, boolean y)", "is equivalent to the Java expression x||y"),
    ("AND(boolean x, boolean y)", "is equivalent to the Java expression x&&y"),
];

pub fn render_constructs() -> String {
    CONSTRUCTS
        .iter()
        .map(|(c, d)| format!("- `{c}` {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_fewshot(examples: &[FewShotExample]) -> String {
    examples
        .iter()
        .enumerate()
        .map(|(i, e)| format!("Example {}\nMR: {}\nEMR:\n```\n{}\n```", i + 1, e.mr, e.emr))
        .collect::<Vec<_>>()
        .join("\n\n")
}

pub fn render_apis(catalog: &ApiCatalog) -> String {
    if catalog.is_empty() {
        return "(No API methods are available; invent a descriptive method name where one is needed.)".into();
    }
    catalog
        .entries()
        .iter()
        .map(|e| {
            if e.doc.is_empty() {
                format!("- {}", e.signature())
            } else {
                format!("- {}: {}", e.signature(), e.doc)
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn fence() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)```[A-Za-z0-9_+-]*[ \t]*\n(.*?)```").expect("fence pattern"))
}

/// The EMR code in a reply and the prose after it: the first fenced block,
/// or else the span from `MR {{` to the last `}}`.
pub fn extract_emr_source(reply: &str) -> Option<(String, String)> {
    let reply = reply.replace("\r\n", "\n");
    if let Some(c) = fence().captures(&reply) {
        let code = c[1].trim_end().to_string();
        let after = reply[c.get(0).expect("match").end()..].to_string();
        return Some((code, after));
    }
    let start = reply.find("MR {{").or_else(|| reply.find("MR{{"))?;
    let end = reply.rfind("}}").filter(|&e| e > start)? + 2;
    Some((reply[start..end].to_string(), reply[end..].to_string()))
}

fn marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\((\d+)\)").expect("marker pattern"))
}

fn prose_line() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*[-*]?\s*\((\d+)\)\s*[:.-]?\s*(.+?)\s*$").expect("prose pattern"))
}

/// Joins statement markers such as `//(3)` with `(3) ...` lines written
/// after the code. Comments without a matching line are kept verbatim.
fn statement_explanations(ast: &EmrAst, prose: &str) -> BTreeMap<usize, String> {
    let notes: BTreeMap<String, String> = prose
        .lines()
        .filter_map(|l| prose_line().captures(l).map(|c| (c[1].to_string(), c[2].to_string())))
        .collect();
    explanations(ast)
        .into_iter()
        .map(|(index, comment)| {
            let resolved: Vec<String> = marker()
                .captures_iter(&comment)
                .filter_map(|c| notes.get(&c[1]).map(|n| format!("({}) {n}", &c[1])))
                .collect();
            (index, if resolved.is_empty() { comment } else { resolved.join(" ") })
        })
        .collect()
}

/// Repairs, parses and validates one phase-6 reply.
pub fn process_reply(mr: &MetamorphicRelation, reply: &str, catalog: &ApiCatalog) -> GeneratedEmr {
    let mut out = GeneratedEmr {
        mr: mr.id.clone(),
        mr_text: mr.text.clone(),
        status: EmrStatus::Unparseable,
        source: String::new(),
        repair_log: RepairLog::default(),
        parse_error: None,
        diagnostics: Vec::new(),
        stubs: Vec::new(),
        explanations: BTreeMap::new(),
        ast: None,
    };
    let Some((code, prose)) = extract_emr_source(reply) else {
        out.source = reply.to_string();
        out.parse_error = Some("the reply contains no EMR code".into());
        return out;
    };
    let (repaired, log) = repair(&code);
    out.source = repaired;
    out.repair_log = log;
    match parse_emr(&out.source) {
        Ok(ast) => {
            out.status = if out.repair_log.is_empty() { EmrStatus::Ok } else { EmrStatus::Repaired };
            out.diagnostics = validate(&ast, catalog);
            out.stubs = stub_names(&out.diagnostics);
            out.explanations = statement_explanations(&ast, &prose);
            out.ast = Some(ast);
        }
        Err(e) => out.parse_error = Some(e.to_string()),
    }
    out
}

/// Hash of the MR list, used to name the generation conversation.
pub fn catalog_hash(mrs: &[MetamorphicRelation]) -> String {
    let listing: Vec<(&str, &str)> = mrs.iter().map(|m| (m.id.as_str(), m.text.as_str())).collect();
    sha256_hex(serde_json::to_string(&listing).expect("MR list serializes").as_bytes())
}

/// Teaches SMRL and the SUT's APIs (phases 1 to 5), then converts each MR
/// in its own phase-6 turn. Replies that cannot be parsed are recorded and
/// the remaining MRs are still converted.
pub fn generate_emrs(
    mrs: &[MetamorphicRelation],
    catalog: &ApiCatalog,
    fewshot: &[FewShotExample],
    config: &LlmConfig,
    templates: &Templates,
    client: &mut dyn ChatClient,
    store: Option<&TranscriptStore>,
) -> Result<GenerateOutcome, LlmError> {
    config.validate()?;
    let mut conv = Conversation::new(
        Pipeline::Generate,
        &catalog_hash(mrs),
        &client.describe(),
        &config.model,
        config.temperature,
    );
    let t = |n: u32| templates.phase(Pipeline::Generate, n);
    let setup: [(u32, Option<(&str, String)>); 5] = [
        (1, None),
        (2, Some(("constructs", render_constructs()))),
        (3, None),
        (4, Some(("fewshot", render_fewshot(fewshot)))),
        (5, Some(("apis", render_apis(catalog)))),
    ];
    for (phase, var) in setup {
        let vars: BTreeMap<&str, String> = var.into_iter().collect();
        chat(client, &mut conv, store, phase, None, render(t(phase).file, &t(phase).template, &vars)?)?;
    }
    let mut emrs = Vec::with_capacity(mrs.len());
    for mr in mrs {
        let vars = BTreeMap::from([("mr", mr.text.clone())]);
        let prompt = render(t(6).file, &t(6).template, &vars)?;
        let reply = chat(client, &mut conv, store, 6, Some(&mr.id), prompt)?;
        emrs.push(process_reply(mr, &reply, catalog));
    }
    Ok(GenerateOutcome {
        emrs,
        conversation: conv,
    })
}
