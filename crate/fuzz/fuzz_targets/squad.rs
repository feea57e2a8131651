#![no_main]

use libfuzzer_sys::fuzz_target;
use nmt_core::corpus::parse_squad;

fuzz_target!(|data: &[u8]| {
    let _ = parse_squad(data);
});
