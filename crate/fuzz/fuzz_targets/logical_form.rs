#![no_main]

use libfuzzer_sys::fuzz_target;
use nmt_core::semparser::LogicalForm;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(lf) = s.parse::<LogicalForm>() {
        let printed = lf.to_string();
        let again: LogicalForm = printed.parse().expect("printed form reparses");
        assert_eq!(again, lf);
    }
});
