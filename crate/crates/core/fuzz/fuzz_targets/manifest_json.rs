#![no_main]
use libfuzzer_sys::{fuzz_target, Corpus};
use vri::config::Manifest;

fuzz_target!(|data: &[u8]| -> Corpus {
    let Ok(text) = std::str::from_utf8(data) else {
        return Corpus::Reject;
    };
    if let Ok(m) = Manifest::from_json(text) {
        let again = serde_json::to_string(&m).expect("manifest serializes");
        assert_eq!(Manifest::from_json(&again).expect("round trip parses"), m);
    }
    Corpus::Keep
});
