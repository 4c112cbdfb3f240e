#![no_main]

use libfuzzer_sys::fuzz_target;
use emrkit_llm::fewshot::parse_example;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_example("fuzz", text);
    }
});
