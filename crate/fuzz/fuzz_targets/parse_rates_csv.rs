#![no_main]

use ldslope::harness::{parse_rates_csv, rates_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_rates_csv(text) {
        let again = parse_rates_csv(&rates_to_csv(&rows).unwrap()).unwrap();
        assert_eq!(again.len(), rows.len());
    }
});
