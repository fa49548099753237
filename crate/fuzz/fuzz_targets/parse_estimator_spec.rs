#![no_main]

use ldslope::estimators::EstimatorSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<EstimatorSpec>() {
        let back: EstimatorSpec = spec.to_string().parse().unwrap();
        assert_eq!(back.to_string(), spec.to_string());
    }
    if let Ok(spec) = serde_json::from_str::<EstimatorSpec>(text) {
        spec.validate().unwrap();
    }
});
