#![no_main]

use libfuzzer_sys::fuzz_target;
use nmt_core::corpus::parse_jsonl_corpus;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_jsonl_corpus(s);
    }
});
