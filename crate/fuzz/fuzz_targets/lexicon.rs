#![no_main]

use libfuzzer_sys::fuzz_target;
use nmt_core::semparser::Lexicon;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = Lexicon::from_json(s);
    }
});
