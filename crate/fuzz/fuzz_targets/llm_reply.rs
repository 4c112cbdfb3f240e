#![no_main]

use libfuzzer_sys::fuzz_target;
use emrkit_llm::{chunk_document, extract_emr_source, parse_mr_list, parse_sentences};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_sentences(text);
    let _ = parse_mr_list(text);
    let _ = extract_emr_source(text);
    assert_eq!(chunk_document(text, 1000).concat(), text);
});
