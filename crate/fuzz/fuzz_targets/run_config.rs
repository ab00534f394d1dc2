#![no_main]

use aquaseries::pipeline::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = RunConfig::from_json(text) {
        let canonical = config.canonical_json();
        let again = RunConfig::from_json(&canonical).expect("canonical config parses");
        assert_eq!(again.canonical_json(), canonical);
        let _ = config.validate_values();
    }
});
