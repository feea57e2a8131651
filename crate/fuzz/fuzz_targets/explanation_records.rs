#![no_main]

use libfuzzer_sys::fuzz_target;
use nmt_core::teacher::parse_explanation_records;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_explanation_records(s);
    }
});
