#![no_main]

use aquaseries::spectra::{parse_matchup_csv, IngestPolicy, NegativePolicy};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let policy = IngestPolicy { negative: NegativePolicy::Allow };
    if let Ok(table) = parse_matchup_csv(data, &policy) {
        let again = parse_matchup_csv(table.to_csv().as_bytes(), &policy).expect("canonical form re-ingests");
        assert_eq!(table.records(), again.records());
    }
    let _ = parse_matchup_csv(data, &IngestPolicy::default());
});
