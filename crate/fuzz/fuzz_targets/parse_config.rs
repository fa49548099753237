#![no_main]

use ldslope::harness::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = ExperimentConfig::from_json_str(text) {
        let back = ExperimentConfig::from_json_str(&c.to_json_pretty()).unwrap();
        assert_eq!(back.hash(), c.hash());
    }
});
