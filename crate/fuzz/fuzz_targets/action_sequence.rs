#![no_main]

use libfuzzer_sys::fuzz_target;
use emrkit_sut::ActionSequence;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(seq) = ActionSequence::from_json(text, 1) {
        assert_eq!(ActionSequence::from_json(&seq.to_json(), 1).unwrap(), seq);
    }
});
