#![no_main]

use libfuzzer_sys::fuzz_target;
use pawnloss::board;
use pawnloss::pgn::parse_pgn;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(games) = parse_pgn(text) else { return };
    for g in games {
        // Every accepted move must replay from the game's start position.
        let boards = g.positions();
        assert_eq!(boards.len(), g.ply_count() + 1);
        for (b, m) in boards.iter().zip(&g.moves) {
            let mv = board::parse_uci_move(b, &m.uci).expect("accepted move replays");
            assert_eq!(board::san(b, mv), m.san);
        }
    }
});
