#![no_main]

use libfuzzer_sys::fuzz_target;
use pawnloss::engine::parse_engine_line;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_engine_line(text);
    }
});
