#![no_main]

use ldslope::harness::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = RunManifest::from_json_str(text) {
        assert!(m.files.iter().all(|f| !f.path.starts_with('/')));
    }
});
