#![no_main]
use libfuzzer_sys::{fuzz_target, Corpus};
use vri::config::RunConfig;

fuzz_target!(|data: &[u8]| -> Corpus {
    let Ok(text) = std::str::from_utf8(data) else {
        return Corpus::Reject;
    };
    if let Ok(cfg) = RunConfig::from_toml(text) {
        let again = cfg.to_toml().expect("valid config serializes");
        assert_eq!(RunConfig::from_toml(&again).expect("round trip parses"), cfg);
    }
    Corpus::Keep
});
