#![no_main]

use aquaseries::model::ModelSnapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(snapshot) = ModelSnapshot::from_bytes(data) {
        let bytes = snapshot.to_bytes();
        let again = ModelSnapshot::from_bytes(&bytes).expect("encoded snapshot decodes");
        assert_eq!(again.to_bytes(), bytes);
        if snapshot.model.params().len() <= 100_000 {
            let window = vec![0.5; snapshot.manifest.input_dim * 2];
            let _ = snapshot.model.predict(&window);
        }
    }
});
