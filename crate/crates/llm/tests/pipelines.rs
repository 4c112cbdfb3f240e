use std::path::{Path, PathBuf};

use emrkit_core::{parse_emr, pretty_print, ApiCatalog, WLC_AMP};
use emrkit_llm::{
    builtin_fewshot, chunk_document, derive_mrs, generate_emrs, ingest_document, load_fewshot, ChatClient,
    Conversation, Document, EmrStatus, LlmConfig, LlmError, MetamorphicRelation, MockClient, Pipeline, Role,
    ScriptEntry, Staging, Templates, TranscriptStore,
};

const R1: &str = "R1: The system should provide advanced search options to allow users to refine their searches based on specific attributes such as price range, category, brand, customer ratings, and availability.";
const MR1: &str = "For a given search query, applying additional filters (e.g., narrowing down by category or price range) should reduce the number of search results or refine them to match the filters more closely.";

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn mock(name: &str) -> MockClient {
    MockClient::load(&fixture(&format!("llm/{name}"))).unwrap()
}

fn requirements() -> Document {
    ingest_document(&fixture("docs/shop-requirements.md")).unwrap()
}

fn entry(pipeline: Pipeline, phase: u32, response: &str) -> ScriptEntry {
    ScriptEntry {
        pipeline,
        phase,
        content_sha256: None,
        subject: None,
        response: response.into(),
    }
}

fn mr1() -> MetamorphicRelation {
    MetamorphicRelation {
        id: "MR1".into(),
        text: MR1.into(),
        source_sentences: vec![R1.into()],
        document: "doc".into(),
        requirement_ref: Some("R1".into()),
    }
}

#[test]
fn derivation_finds_the_search_filter_relation() {
    let doc = requirements();
    let out = derive_mrs(&doc, &LlmConfig::default(), &Templates::builtin(), &mut mock("scripts.json"), None).unwrap();
    assert_eq!(out.mrs.len(), 1);
    let mr = &out.mrs[0];
    assert_eq!(mr.id, "MR1");
    assert_eq!(mr.text, MR1);
    assert_eq!(mr.source_sentences, [R1]);
    assert_eq!(mr.requirement_ref.as_deref(), Some("R1"));
    assert_eq!(mr.document, doc.id);
    assert_eq!(out.sentences.len(), 2);
    assert!(out.flagged.is_empty(), "{:?}", out.flagged);
    assert_eq!(out.conversation.phases(), [1, 2, 3, 4]);
    assert_eq!(out.conversation.messages.len(), 8);
    out.conversation.check_phase_order().unwrap();
}

#[test]
fn quoted_sentences_missing_from_the_document_are_flagged() {
    let scripts = vec![
        entry(Pipeline::Derive, 1, "ok"),
        entry(Pipeline::Derive, 2, "ok"),
        entry(Pipeline::Derive, 3, "R3: Search should ignore the letter case of the query.\nThe shop never sleeps."),
        entry(Pipeline::Derive, 4, "1. Case does not matter. [Source: \"R3: Search should ignore the letter case of the query.\"]"),
    ];
    let out = derive_mrs(&requirements(), &LlmConfig::default(), &Templates::builtin(), &mut MockClient::new(scripts), None)
        .unwrap();
    assert_eq!(out.flagged.len(), 1);
    assert_eq!(out.flagged[0].sentence, "The shop never sleeps.");
    assert_eq!(out.mrs[0].requirement_ref.as_deref(), Some("R3"));
}

#[test]
fn no_relevant_sentences_means_no_mrs_and_no_phase_four() {
    let scripts = vec![
        entry(Pipeline::Derive, 1, "ok"),
        entry(Pipeline::Derive, 2, "summary"),
        entry(Pipeline::Derive, 3, "NONE"),
    ];
    let out = derive_mrs(&requirements(), &LlmConfig::default(), &Templates::builtin(), &mut MockClient::new(scripts), None)
        .unwrap();
    assert!(out.mrs.is_empty());
    assert_eq!(out.conversation.phases(), [1, 2, 3]);
}

#[test]
fn malformed_mr_list_is_a_format_error_but_the_transcript_survives() {
    let dir = tempfile::tempdir().unwrap();
    let store = TranscriptStore::new(dir.path()).unwrap();
    let scripts = vec![
        entry(Pipeline::Derive, 1, "ok"),
        entry(Pipeline::Derive, 2, "ok"),
        entry(Pipeline::Derive, 3, "Search should ignore the letter case of the query."),
        entry(Pipeline::Derive, 4, "1. Case does not matter."),
    ];
    let doc = requirements();
    let err = derive_mrs(&doc, &LlmConfig::default(), &Templates::builtin(), &mut MockClient::new(scripts), Some(&store))
        .unwrap_err();
    assert!(matches!(err, LlmError::ResponseFormat { phase: 4, .. }), "{err}");
    let saved = TranscriptStore::load(&store.path_of(&format!("derive-{}", doc.short_id()))).unwrap();
    assert_eq!(saved.messages.len(), 8);
}

#[test]
fn derivation_is_deterministic() {
    let doc = requirements();
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::new(dir.path()).unwrap();
        let out =
            derive_mrs(&doc, &LlmConfig::default(), &Templates::builtin(), &mut mock("scripts.json"), Some(&store)).unwrap();
        let transcript = std::fs::read_to_string(store.path_of(&out.conversation.id)).unwrap();
        (serde_json::to_string(&out.mrs).unwrap(), transcript)
    };
    assert_eq!(run(), run());
}

#[test]
fn unscripted_turn_is_a_missing_script_error() {
    let scripts = vec![entry(Pipeline::Derive, 1, "ok"), entry(Pipeline::Derive, 2, "ok")];
    let err = derive_mrs(&requirements(), &LlmConfig::default(), &Templates::builtin(), &mut MockClient::new(scripts), None)
        .unwrap_err();
    match err {
        LlmError::MissingScript { pipeline, phase, .. } => {
            assert_eq!((pipeline, phase), (Pipeline::Derive, 3));
        }
        other => panic!("unexpected {other}"),
    }
    assert!(MockClient::from_json(r#"[{"pipeline": "derive", "phase": 5, "response": ""}]"#).is_err());
}

#[test]
fn content_hash_beats_subject_beats_wildcard() {
    let doc = Document::from_text("R1: Only line.").unwrap();
    let prompt = emrkit_llm::render(
        "2-document.txt",
        &Templates::builtin().derive[1].template,
        &[("part", "1".to_string()), ("parts", "1".into()), ("document", doc.text.clone())].into_iter().collect(),
    )
    .unwrap();
    let mut specific = entry(Pipeline::Derive, 2, "by hash");
    specific.content_sha256 = Some({
        use sha2_hex::hash;
        hash(&prompt)
    });
    let scripts = vec![
        entry(Pipeline::Derive, 1, "ok"),
        entry(Pipeline::Derive, 2, "wildcard"),
        specific,
        entry(Pipeline::Derive, 3, "NONE"),
    ];
    let out = derive_mrs(&doc, &LlmConfig::default(), &Templates::builtin(), &mut MockClient::new(scripts), None).unwrap();
    assert_eq!(out.conversation.messages[3].content, "by hash");
}

mod sha2_hex {
    /// Independent digest via the system `sha256sum`, falling back to a
    /// known vector check when the tool is missing.
    pub fn hash(text: &str) -> String {
        use std::io::Write;
        use std::process::{Command, Stdio};
        let mut child = Command::new("sha256sum")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .expect("sha256sum is available");
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
        let out = child.wait_with_output().unwrap();
        String::from_utf8(out.stdout).unwrap().split_whitespace().next().unwrap().to_string()
    }
}

/// Fails on the n-th completion, simulating a crash mid-conversation.
struct Crashing {
    inner: MockClient,
    remaining: usize,
}

impl ChatClient for Crashing {
    fn complete(&mut self, c: &Conversation) -> Result<String, LlmError> {
        if self.remaining == 0 {
            return Err(LlmError::Transport {
                attempts: 1,
                message: "connection reset".into(),
            });
        }
        self.remaining -= 1;
        self.inner.complete(c)
    }

    fn describe(&self) -> String {
        "crashing".into()
    }
}

#[test]
fn a_crash_loses_at_most_the_pending_turn() {
    let doc = requirements();
    for answered in 0..4 {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::new(dir.path()).unwrap();
        let mut client = Crashing {
            inner: mock("scripts.json"),
            remaining: answered,
        };
        let err = derive_mrs(&doc, &LlmConfig::default(), &Templates::builtin(), &mut client, Some(&store)).unwrap_err();
        assert!(err.is_transport());
        let saved = TranscriptStore::load(&store.path_of(&format!("derive-{}", doc.short_id()))).unwrap();
        assert_eq!(saved.messages.len(), 2 * answered + 1);
        assert_eq!(saved.messages.last().unwrap().role, Role::User);
        saved.check_phase_order().unwrap();
        assert!(std::fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
    }
}

#[test]
fn long_documents_are_sent_in_parts() {
    let mut text = String::new();
    let mut i = 0;
    while text.len() < 200_000 {
        i += 1;
        text.push_str(&format!("## Section {i}\n\n"));
        for j in 0..8 {
            text.push_str(&format!("R{i}.{j}: The system should keep record {j} of section {i} consistent across every page view and export.\n\n"));
        }
    }
    let config = LlmConfig::default();
    let parts = chunk_document(&text, config.chunk_chars);
    assert!(parts.len() >= 200_000 / config.chunk_chars);
    assert_eq!(parts.concat(), text);
    assert!(parts.iter().all(|p| p.chars().count() <= config.chunk_chars));
    assert!(parts[1..].iter().all(|p| p.starts_with("## Section")));

    let doc = Document::from_text(&text).unwrap();
    let scripts = vec![
        entry(Pipeline::Derive, 1, "ok"),
        entry(Pipeline::Derive, 2, "noted"),
        entry(Pipeline::Derive, 3, "NONE"),
    ];
    let out = derive_mrs(&doc, &config, &Templates::builtin(), &mut MockClient::new(scripts), None).unwrap();
    let phase2_users = out
        .conversation
        .messages
        .iter()
        .filter(|m| m.phase == 2 && m.role == Role::User)
        .count();
    assert_eq!(phase2_users, parts.len() + 1);
    out.conversation.check_phase_order().unwrap();
}

#[test]
fn ingestion_normalizes_and_rejects_unsupported_files() {
    let dir = tempfile::tempdir().unwrap();
    let lf = dir.path().join("a.md");
    let crlf = dir.path().join("b.txt");
    std::fs::write(&lf, "R1: Hello.\nR2: World.\n").unwrap();
    std::fs::write(&crlf, "\u{feff}R1: Hello.\r\nR2: World.\r\n").unwrap();
    let a = ingest_document(&lf).unwrap();
    let b = ingest_document(&crlf).unwrap();
    assert_eq!(a.text, b.text);
    assert_eq!(a.id, b.id);
    // sha256("R1: Hello.\nR2: World.\n") computed with sha256sum
    assert_eq!(a.id, sha2_hex::hash("R1: Hello.\nR2: World.\n"));

    let pdf = dir.path().join("spec.pdf");
    std::fs::write(&pdf, "%PDF-1.7").unwrap();
    assert!(matches!(ingest_document(&pdf), Err(LlmError::UnsupportedFormat { .. })));
    let disguised = dir.path().join("spec.txt");
    std::fs::write(&disguised, "%PDF-1.7\n...").unwrap();
    assert!(matches!(ingest_document(&disguised), Err(LlmError::UnsupportedFormat { .. })));
    let binary = dir.path().join("bin.md");
    std::fs::write(&binary, [0xff, 0xfe, 0x00, 0x41]).unwrap();
    assert!(matches!(ingest_document(&binary), Err(LlmError::UnsupportedFormat { .. })));
    let empty = dir.path().join("empty.md");
    std::fs::write(&empty, " \n\n").unwrap();
    assert!(matches!(ingest_document(&empty), Err(LlmError::UnsupportedFormat { .. })));
    assert!(matches!(ingest_document(&dir.path().join("missing.md")), Err(LlmError::Io { .. })));
}

#[test]
fn single_shot_mode_is_refused() {
    let config = LlmConfig {
        staging: Staging::SingleShot,
        ..LlmConfig::default()
    };
    let err = derive_mrs(&requirements(), &config, &Templates::builtin(), &mut mock("scripts.json"), None).unwrap_err();
    assert!(matches!(err, LlmError::SingleShotRefused));
}

fn fig4() -> String {
    std::fs::read_to_string(fixture("fig4.smrl")).unwrap()
}

#[test]
fn generation_reproduces_the_filter_emr_with_six_stubs() {
    let out = generate_emrs(
        &[mr1()],
        &ApiCatalog::empty(),
        &builtin_fewshot(),
        &LlmConfig::default(),
        &Templates::builtin(),
        &mut mock("scripts.json"),
        None,
    )
    .unwrap();
    assert_eq!(out.conversation.phases(), [1, 2, 3, 4, 5, 6]);
    assert_eq!(out.emrs.len(), 1);
    let emr = &out.emrs[0];
    assert_eq!(emr.status, EmrStatus::Ok);
    assert!(emr.repair_log.is_empty());
    assert_eq!(
        emr.stubs,
        ["isSearchAction", "getFilterTypes", "applyFilter", "notSameFilterApplied", "fewerResults", "moreRelevantResults"]
    );
    let expected = parse_emr(&fig4()).unwrap();
    assert_eq!(pretty_print(emr.ast.as_ref().unwrap()), pretty_print(&expected));
    let first = emr.explanations.values().next().unwrap();
    assert_eq!(first, "(1) Iterate over every action of the source input.");
    assert!(emr.explanations.values().any(|e| e.contains("(9) or its results match the filter more closely.")));
}

#[test]
fn catalog_apis_are_not_stubs() {
    let catalog = ApiCatalog::from_json(&std::fs::read_to_string(fixture("fig4_catalog.json")).unwrap()).unwrap();
    let out = generate_emrs(
        &[mr1()],
        &catalog,
        &builtin_fewshot(),
        &LlmConfig::default(),
        &Templates::builtin(),
        &mut mock("scripts.json"),
        None,
    )
    .unwrap();
    assert!(out.emrs[0].stubs.is_empty());
    let apis_prompt = &out.conversation.messages[8].content;
    assert!(apis_prompt.contains("boolean isSearchAction(Action action)"), "{apis_prompt}");
}

#[test]
fn single_ampersand_defect_is_repaired() {
    let out = generate_emrs(
        &[mr1()],
        &ApiCatalog::empty(),
        &builtin_fewshot(),
        &LlmConfig::default(),
        &Templates::builtin(),
        &mut mock("scripts-defect.json"),
        None,
    )
    .unwrap();
    let emr = &out.emrs[0];
    assert_eq!(emr.status, EmrStatus::Repaired);
    assert_eq!(emr.repair_log.count(WLC_AMP), 1);
    assert_eq!(emr.repair_log.entries[0].line, 9);
    let expected = parse_emr(&fig4()).unwrap();
    assert_eq!(pretty_print(emr.ast.as_ref().unwrap()), pretty_print(&expected));
}

#[test]
fn unparseable_replies_are_kept_and_later_mrs_still_run() {
    let mut second = mr1();
    second.id = "MR2".into();
    let mut scripts: Vec<ScriptEntry> = (1..=5).map(|p| entry(Pipeline::Generate, p, "Understood.")).collect();
    scripts.push(ScriptEntry {
        subject: Some("MR1".into()),
        ..entry(Pipeline::Generate, 6, "```\nMR {{ IMPLIES(a(), ; }}\n```")
    });
    scripts.push(ScriptEntry {
        subject: Some("MR2".into()),
        ..entry(Pipeline::Generate, 6, "MR {{\n\tIMPLIES(ready(), done());\n}}")
    });
    let out = generate_emrs(
        &[mr1(), second],
        &ApiCatalog::empty(),
        &builtin_fewshot(),
        &LlmConfig::default(),
        &Templates::builtin(),
        &mut MockClient::new(scripts),
        None,
    )
    .unwrap();
    assert_eq!(out.emrs[0].status, EmrStatus::Unparseable);
    assert!(out.emrs[0].parse_error.is_some());
    assert!(out.emrs[0].has_errors());
    assert_eq!(out.emrs[1].status, EmrStatus::Ok);
    assert_eq!(out.emrs[1].stubs, ["ready", "done"]);
}

#[test]
fn no_mrs_runs_only_the_teaching_phases() {
    let out = generate_emrs(
        &[],
        &ApiCatalog::empty(),
        &builtin_fewshot(),
        &LlmConfig::default(),
        &Templates::builtin(),
        &mut mock("scripts.json"),
        None,
    )
    .unwrap();
    assert!(out.emrs.is_empty());
    assert_eq!(out.conversation.phases(), [1, 2, 3, 4, 5]);
    assert_eq!(out.conversation.messages.len(), 10);
}

#[test]
fn builtin_few_shot_examples_are_valid() {
    let examples = builtin_fewshot();
    assert_eq!(examples.len(), 3);
    for e in &examples {
        assert!(!e.mr.is_empty());
        parse_emr(&e.emr).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.smrl"), "// MR: ok\n\nMR {{ IMPLIES(x(), y()); }}").unwrap();
    assert_eq!(load_fewshot(dir.path()).unwrap().len(), 1);
    std::fs::write(dir.path().join("b.smrl"), "// MR: broken\n\nMR {{ IMPLIES(x(), ; }}").unwrap();
    assert!(matches!(load_fewshot(dir.path()), Err(LlmError::FewShot { .. })));
    std::fs::write(dir.path().join("b.smrl"), "MR {{ }}").unwrap();
    assert!(matches!(load_fewshot(dir.path()), Err(LlmError::FewShot { .. })));
}

#[test]
fn template_overrides_replace_single_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("derive")).unwrap();
    std::fs::write(dir.path().join("derive/1-context.txt"), "Custom context.").unwrap();
    let t = Templates::load(dir.path()).unwrap();
    assert_eq!(t.derive[0].template, "Custom context.");
    assert_eq!(t.derive[1], Templates::builtin().derive[1]);
}
