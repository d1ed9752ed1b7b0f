#![no_main]

use libfuzzer_sys::fuzz_target;
use pawnloss::board::{self, Board};

// Input: an optional FEN line, then a SAN token.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (b, san) = match text.split_once('\n') {
        Some((fen, san)) => match board::parse_fen(fen) {
            Ok(b) => (b, san),
            Err(_) => return,
        },
        None => (Board::default(), text),
    };
    if let Ok(mv) = board::resolve_san(&b, san) {
        assert!(b.legal(mv));
        let canonical = board::san(&b, mv);
        assert_eq!(
            board::resolve_san(&b, &canonical).expect("canonical SAN resolves"),
            mv
        );
    }
});
