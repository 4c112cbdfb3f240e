#![no_main]

use libfuzzer_sys::fuzz_target;
use emrkit_core::repair;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (fixed, _) = repair(text);
    let (twice, log) = repair(&fixed);
    assert_eq!(twice, fixed);
    assert!(log.is_empty());
});
