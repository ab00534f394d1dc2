#![no_main]

use aquaseries::features::parse_feature;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(expr) = parse_feature(text) {
        // canonical names parse back to the same expression
        assert_eq!(parse_feature(&expr.name()), Ok(expr));
    }
});
