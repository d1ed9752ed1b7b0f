#![no_main]

use libfuzzer_sys::fuzz_target;
use pawnloss::board;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(b) = board::parse_fen(text) else {
        return;
    };
    // Written FEN must be accepted again and describe the same position.
    let again = board::parse_fen(&board::to_fen(&b)).expect("own FEN parses");
    assert_eq!(board::position_key(&b), board::position_key(&again));
});
