#![no_main]

use libfuzzer_sys::fuzz_target;
use nmt_core::semparser::parse_template;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_template(s);
    }
});
