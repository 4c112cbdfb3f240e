#![no_main]

use libfuzzer_sys::fuzz_target;
use std::collections::BTreeMap;
use std::sync::OnceLock;

use emrkit_core::{parse_emr, EmrAst};
use emrkit_grader::parse_annotations;

fn suite() -> &'static BTreeMap<String, EmrAst> {
    static SUITE: OnceLock<BTreeMap<String, EmrAst>> = OnceLock::new();
    SUITE.get_or_init(|| {
        let source = include_str!("../../fixtures/emrs/01-filter-relevance.smrl");
        BTreeMap::from([("01-filter-relevance".to_string(), parse_emr(source).unwrap())])
    })
}

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_annotations(text, suite());
    }
});
