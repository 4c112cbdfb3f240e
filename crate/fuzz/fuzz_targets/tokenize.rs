#![no_main]

use libfuzzer_sys::fuzz_target;
use emrkit_core::tokenize;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(lexed) = tokenize(text) {
        assert_eq!(lexed.reconstruct(), text);
    }
});
