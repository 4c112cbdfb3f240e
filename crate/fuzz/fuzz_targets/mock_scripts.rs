#![no_main]

use libfuzzer_sys::fuzz_target;
use emrkit_llm::MockClient;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = MockClient::from_json(text);
    }
});
