#![no_main]

use aquaseries::screening::{extract_point, SceneGrid};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(scene) = SceneGrid::from_bytes(data) {
        let bytes = scene.to_bytes();
        let again = SceneGrid::from_bytes(&bytes).expect("encoded scene decodes");
        assert_eq!(again.to_bytes(), bytes);
        if scene.width * scene.height <= 4096 {
            let (x, y) = scene.cell_center(0, 0);
            let _ = extract_point(&scene, (x, y), 20.0, 200.0);
        }
    }
});
