#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use nmt_core::semparser::{parse_explanation, Explanation, Lexicon};

static LEXICON: OnceLock<Lexicon> = OnceLock::new();

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 4096 {
        return;
    }
    let lex = LEXICON.get_or_init(Lexicon::builtin);
    if let Ok(expl) = Explanation::new("fuzz", "fuzz", s) {
        let _ = parse_explanation(&expl, lex);
    }
});
