#![no_main]

use libfuzzer_sys::fuzz_target;
use pawnloss::engine::MockTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = MockTable::parse(text);
    }
});
