#![no_main]

use ldslope::bounds::LimitCurve;
use ldslope::divergence::RenyiCurve;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = RenyiCurve::from_csv_str(text);
    let _ = LimitCurve::from_csv_str(text);
});
