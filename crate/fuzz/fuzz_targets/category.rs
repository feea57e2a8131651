#![no_main]

use libfuzzer_sys::fuzz_target;
use nmt_core::semparser::Category;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cat) = s.parse::<Category>() {
        let again: Category = cat.to_string().parse().expect("printed category reparses");
        assert_eq!(again, cat);
    }
});
