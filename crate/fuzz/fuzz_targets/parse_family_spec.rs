#![no_main]

use ldslope::family::{build_family, FamilySpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<FamilySpec>() {
        if let Ok(model) = build_family(&spec) {
            // Labels round to 12 digits, so nearly degenerate parameters may
            // not rebuild; when they do, the label is a fixed point.
            let spec: FamilySpec = model.label().parse().unwrap();
            if let Ok(again) = build_family(&spec) {
                assert_eq!(again.label(), model.label());
            }
        }
    }
});
