#![no_main]

use libfuzzer_sys::fuzz_target;
use emrkit_core::{parse_emr, pretty_print};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ast) = parse_emr(text) {
        let printed = pretty_print(&ast);
        let again = parse_emr(&printed).expect("printed source parses");
        assert!(again.structurally_eq(&ast));
    }
});
