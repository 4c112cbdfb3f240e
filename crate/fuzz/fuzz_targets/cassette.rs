#![no_main]

use libfuzzer_sys::fuzz_target;
use emrkit_sut::Cassette;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cassette) = Cassette::from_json(text) {
        let again = Cassette::from_json(&cassette.to_json()).expect("saved cassette loads");
        assert_eq!(again.to_json(), cassette.to_json());
    }
});
